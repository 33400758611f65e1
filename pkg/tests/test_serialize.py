import numpy as np

from trisys import serialize
from trisys.dialg import BlockContext, DialgebraInstance, dminus_bracket, matrix_dialgebra
from trisys.embed import build_U
from trisys.trisystems import TrisystemInstance, att1_from_dialgebra


def same(a, b):
    return a.field == b.field and a.labels == b.labels and all(np.array_equal(a.tensors[k], b.tensors[k]) for k in a.tensors)


def test_round_trips(tmp_path):
    D = matrix_dialgebra(BlockContext(2, 1, 5))
    T = att1_from_dialgebra(D)
    L = dminus_bracket(D)
    for obj, cls in ((D, DialgebraInstance), (T, TrisystemInstance), (L, None)):
        path = tmp_path / "x.json"
        serialize.dump(obj, path)
        back = serialize.load(path)
        assert cls is None or isinstance(back, cls)
        assert same(obj, back)


def test_embedding_loads_its_algebra(tmp_path):
    U = build_U(att1_from_dialgebra(matrix_dialgebra(BlockContext(2, 1, 5))))
    path = tmp_path / "u.json"
    serialize.dump(U, path)
    assert same(U.algebra, serialize.load(path))
