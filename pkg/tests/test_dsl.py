import pytest
from hypothesis import given
from hypothesis import strategies as st

from trisys import dsl
from trisys.dsl import Bracket, Polynomial, Var


def test_round_trip_simple():
    text = "{{a,b,c}_1,d,e}_2 = {a,{b,c,d}_3,e}_2 - 2*{a,b,{c,d,e}_1}_3"
    (chain,) = dsl.parse(text)
    (again,) = dsl.parse(dsl.format(chain))
    assert again.members == chain.members


def test_labels_and_trailing_semicolon():
    chains = dsl.parse("#@ first\n{a,b}={b,a};\n#@ second\n{{a,b},c} = {a,{b,c}};")
    assert [c.name for c in chains] == ["first", "second"]
    assert chains[1].arity == 2


def test_sums_inside_brackets_expand():
    p = dsl.parse_polynomial("{a,{b,c}+{c,b}}")
    assert p == dsl.parse_polynomial("{a,{b,c}} + {a,{c,b}}")


def test_zero_literal():
    (chain,) = dsl.parse("{a,b} - {a,b} = 0")
    assert all(p.is_zero() for p in dsl.chain_to_polynomials(chain))


@pytest.mark.parametrize("bad", ["{a,b", "{a,a}", "{a,b}_x", "a = ", "{a,{b,c,d}}"])
def test_errors(bad):
    with pytest.raises(dsl.DSLError):
        dsl.parse(bad)


def test_latex():
    (chain,) = dsl.parse("{a,b,c}_2 = {c,b,a}_1")
    assert dsl.format_latex(chain) == r"\{a,b,c\}_{2} = \{c,b,a\}_{1}"


@st.composite
def monomials(draw, depth=2):
    counter = [0]
    subscripted = draw(st.booleans())

    def build(d):
        if d == 0 or draw(st.booleans()):
            counter[0] += 1
            return Var(f"x{counter[0]}")
        args = tuple(build(d - 1) for _ in range(3))
        return Bracket(args, draw(st.sampled_from([1, 2, 3])) if subscripted else None)

    return build(depth)


@given(monomials(), st.integers(-3, 3).filter(bool))
def test_format_parse_round_trip(m, c):
    p = Polynomial.monomial(m, c)
    assert dsl.parse_polynomial(dsl.format(p)) == p
