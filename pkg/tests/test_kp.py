import pytest

from trisys import catalog, dsl
from trisys.dsl import SubscriptError
from trisys.kp import KPError, compare_chain_sets, kp_apply, kp_part2, subscript_monomial


def mono(text):
    (m,) = dsl.parse_polynomial(text).monomials()
    return m


@pytest.mark.parametrize(
    "central,expected",
    [
        ("a", "{{a,b,c}_1,d,e}_1"),
        ("c", "{{a,b,c}_3,d,e}_1"),
        ("d", "{{a,b,c}_3,d,e}_2"),
        ("e", "{{a,b,c}_3,d,e}_3"),
    ],
)
def test_central_argument_fixes_subscripts(central, expected):
    assert subscript_monomial(mono("{{a,b,c},d,e}"), central) == mono(expected)


def test_part2_shape():
    chains = kp_part2(3)
    assert len(chains) == 6
    assert all(len(c.members) == 3 for c in chains)
    assert len(kp_part2(2)) == 2


def test_associativity_gives_five_dialgebra_axioms():
    (assoc,) = catalog.load("ASSOC")
    out = kp_apply(assoc)
    assert len(out.part1) == 3 and len(out.part2) == 2
    missing, extra = compare_chain_sets(out.deduped, catalog.load("DIALGEBRA"))
    assert not missing and not extra


def test_golden_mismatch_is_reported():
    (ats,) = catalog.load("ATS1")
    out = kp_apply(ats)
    missing, extra = compare_chain_sets(out.deduped[:-1], catalog.load("ATT1"))
    assert len(missing) == 1 and not extra


def test_rejects_subscripted_input():
    (c,) = dsl.parse("{a,b}_1 = {b,a}_2")
    with pytest.raises(SubscriptError):
        kp_apply(c)


def test_rejects_bracket_free_input():
    (c,) = dsl.parse("a = a")
    with pytest.raises(KPError):
        kp_apply(c)
