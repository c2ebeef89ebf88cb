import pytest
from hypothesis import given
from hypothesis import strategies as st

from fieldcon.frontend import (
    ParseError,
    SemanticError,
    parse_density,
    parse_gauge_file,
    parse_model,
    parse_quadratic_density,
    print_model,
    tokenize,
)
from fieldcon.presets import (
    FREE_SCALAR,
    PRESET_NAMES,
    covariant_jr_lagrangian,
    preset_model,
    stueckelberg,
)
from fieldcon.symkernel import param_field

ATOMS = ["u", "dt(u)", "dx(u)", "v", "dt(v)", "dx(v)"]
term = st.tuples(st.integers(-3, 3), st.sampled_from(["1", "g", "1/2", "g^2"]), st.sampled_from(ATOMS), st.sampled_from(ATOMS))


def _source(terms, spaced=False):
    parts = [f"{c}*{k}*{x}*{y}" for c, k, x, y in terms] or ["0"]
    body = (" +\n   " if spaced else "+").join(parts)
    return f"params g;\nfields u v;\nL = {body};\n"


@given(st.lists(term, max_size=6))
def test_print_parse_roundtrip(terms):
    m = parse_model(_source(terms))
    assert parse_model(print_model(m)) == m


@given(st.lists(term, max_size=6))
def test_layout_and_comments_do_not_matter(terms):
    plain = parse_model(_source(terms))
    spaced = parse_model("# leading comment\n" + _source(terms, spaced=True).replace(";\n", ";  # trailing\n"))
    assert plain == spaced


@given(st.lists(term, min_size=1, max_size=4), st.sampled_from(ATOMS))
def test_cubic_terms_are_rejected(terms, extra):
    src = _source(terms).replace("L = ", f"L = {extra}*{extra}*{extra} + ")
    with pytest.raises(SemanticError):
        parse_model(src)


def test_presets_parse():
    for name in PRESET_NAMES:
        m, gauge = preset_model(name)
        assert m.name == name
        assert (gauge is not None) == name.endswith("gaugefixed")
    assert parse_model(FREE_SCALAR).fields == ("phi",)


def test_unknown_preset():
    with pytest.raises(SemanticError, match="unknown preset"):
        preset_model("jr-a2")


def test_covariant_form_matches_component_preset():
    m, _ = preset_model("jr-symbolic")
    assert covariant_jr_lagrangian() == m


def test_specialising_symbolic_model_gives_a1_model():
    m, _ = preset_model("jr-symbolic")
    a1, _ = preset_model("jr-a1")
    assert m.specialize({"a": 1, "e": 1}) == a1


def test_stueckelberg_shift_gives_wz_model():
    a1, _ = preset_model("jr-a1")
    wz, _ = preset_model("jr-wz")
    assert stueckelberg(a1) == wz


@pytest.mark.parametrize(
    "src, line, col",
    [
        ("fields phi; L = dt(phi)*;", 1, 25),
        ("fields phi; L = 1/2*dt(phi)^2 $;", 1, 31),
        ("fields phi;\nL = dt(phi)^2 +\n  (phi;", 3, 7),
        ("fields phi;\nL = dt(phi)^2\n  phi^2;", 3, 3),
        ("fields phi;\nwhatever phi;", 2, 1),
        ("fields phi; L dt(phi)^2;", 1, 15),
    ],
)
def test_parse_error_locations(src, line, col):
    with pytest.raises(ParseError) as exc:
        parse_model(src)
    assert (exc.value.line, exc.value.col) == (line, col)
    assert f"line {line}, column {col}" in str(exc.value)


@pytest.mark.parametrize(
    "src, message",
    [
        ("fields phi; L = phi;", "linear term"),
        ("fields phi phi; L = phi^2;", "declared twice"),
        ("params a; fields phi; L = a*dt(phi)^2/phi;", "division by a field"),
        ("fields phi; L = dt(dt(phi))*phi;", "second derivative"),
        ("L = 0;", "no fields"),
        ("fields phi;", "no Lagrangian"),
        ("fields phi; L = phi^2; L = phi^2;", "second Lagrangian"),
        ("fields phi; L = psi^2;", "psi"),
    ],
)
def test_semantic_errors(src, message):
    with pytest.raises(SemanticError, match=message):
        parse_model(src)


def test_tokenize_positions():
    toks = tokenize("L = dt(phi)\n  + 2")
    assert [(t.text, t.line, t.col) for t in toks[:3]] == [("L", 1, 1), ("=", 1, 3), ("dt", 1, 5)]
    assert (toks[-2].text, toks[-2].line, toks[-2].col) == ("2", 2, 5)
    assert toks[-1].kind == "eof"


def test_density_parsing():
    K = param_field(("a",))
    coords = ("phi", "pi_phi")
    e = parse_density("-pi_phi + a*dx(phi)", coords, K, ("a",))
    assert e.degrees() == {1}
    with pytest.raises(SemanticError):
        parse_density("phi*pi_phi", coords, K, ("a",))
    with pytest.raises(SemanticError):
        parse_quadratic_density("phi + pi_phi^2", coords, K, ("a",))
    with pytest.raises(ParseError):
        parse_density("phi +", coords, K)


def test_gauge_file_skips_comments_and_blank_lines():
    spec = parse_gauge_file("# conditions\n\n-dx(theta)   # first\n-pi_phi + A0;\n")
    assert spec.conditions == ("-dx(theta)", "-pi_phi + A0")
