import warnings
from decimal import Decimal

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tirforge.expr import (
    Aggregate,
    Binary,
    Call,
    DialectWarning,
    EquivalencePolicy,
    Num,
    ParseError,
    ReservedConstructError,
    Sym,
    Unary,
    UnbalancedBraces,
    equivalence_check,
    extract_boxed,
    normalize_answer_text,
    parse_expression,
    render_expression,
)

from equivalence_corpus import CORPUS


class TestParse:
    def test_power_and_subtraction_tree(self):
        ast = parse_expression("(x-0)**2 + (y-0)**2 - 4**2")
        assert isinstance(ast, Binary) and ast.op == "-"
        assert isinstance(ast.right, Binary) and ast.right.op == "**"

    def test_single_symbol(self):
        assert parse_expression("x") == Sym("x")

    def test_abs_call(self):
        assert parse_expression("Abs(-4)") == Call("Abs", (Unary("-", Num(4)),))

    def test_whitespace_insensitive(self):
        assert parse_expression("1+2 * x") == parse_expression("1 + 2*x")

    def test_tuple_vs_grouping(self):
        assert parse_expression("(4, 0)") == Aggregate("tuple", (Num(4), Num(0)))
        assert parse_expression("(4)") == Num(4)

    def test_top_level_comma_list(self):
        ast = parse_expression("1, 2, 3")
        assert isinstance(ast, Aggregate) and ast.kind == "list" and len(ast.elements) == 3

    def test_decimals_are_marked(self):
        assert parse_expression("0.50") == Num(Decimal("0.50"))
        assert parse_expression("3") == Num(3)

    def test_bare_equals_is_reserved(self):
        with pytest.raises(ReservedConstructError):
            parse_expression("y = 2*x")

    def test_eq_function_is_fine(self):
        ast = parse_expression("Eq(y, 2*x)")
        assert isinstance(ast, Call) and ast.name == "Eq"

    def test_parse_error_carries_byte_offset(self):
        with pytest.raises(ParseError) as err:
            parse_expression("1 + ?")
        assert err.value.byte_offset == 4

    def test_error_hint_on_missing_operand(self):
        with pytest.raises(ParseError) as err:
            parse_expression("1 +")
        assert err.value.expected is not None

    def test_empty_input(self):
        with pytest.raises(ParseError):
            parse_expression("   ")

    def test_multi_letter_symbol_warns(self):
        with pytest.warns(DialectWarning):
            parse_expression("lam + 1")

    def test_single_letters_do_not_warn(self):
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            parse_expression("x*y + pi")

    def test_implicit_multiplication_rejected(self):
        with pytest.raises(ParseError):
            parse_expression("2x")

    def test_inequality_operators(self):
        ast = parse_expression("(2 < x) | (x < -2)")
        assert isinstance(ast, Binary) and ast.op == "|"

    def test_set_canonical_view_is_sorted(self):
        ast = parse_expression("{3, 1, 2}")
        assert ast.elements == (Num(3), Num(1), Num(2))
        assert ast.canonical_elements() == (Num(1), Num(2), Num(3))


_names = st.sampled_from("xyzabc").map(Sym)
_ints = st.integers(min_value=0, max_value=10**6).map(Num)
_decimals = st.from_regex(r"[0-9]{1,4}\.[0-9]{1,4}", fullmatch=True).map(lambda s: Num(Decimal(s)))
_atoms = st.one_of(_ints, _decimals, _names)


def _compound(children):
    return st.one_of(
        st.builds(Unary, st.sampled_from(["-", "+"]), children),
        st.builds(
            Binary,
            st.sampled_from(["+", "-", "*", "/", "**", "<", "<=", ">", ">=", "|", "&"]),
            children,
            children,
        ),
        st.builds(lambda args: Call("f", tuple(args)), st.lists(children, min_size=1, max_size=3)),
        st.builds(lambda a: Call("sqrt", (a,)), children),
        st.builds(
            lambda kind, elements: Aggregate(kind, tuple(elements)),
            st.sampled_from(["tuple", "list", "set"]),
            st.lists(children, min_size=2, max_size=3),
        ),
    )


_trees = st.recursive(_atoms, _compound, max_leaves=25)


class TestRender:
    @settings(max_examples=300, deadline=None)
    @given(_trees)
    def test_roundtrip(self, tree):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", DialectWarning)
            assert parse_expression(render_expression(tree)) == tree

    def test_canonical_spellings(self):
        assert render_expression(parse_expression("1 + sqrt(15)")) == "1 + sqrt(15)"
        assert render_expression(Binary("**", Sym("x"), Num(2))) == "x**2"
        assert render_expression(Aggregate("tuple", (Num(4), Num(0)))) == "(4, 0)"

    def test_power_parenthesization(self):
        assert render_expression(Binary("**", Binary("**", Num(2), Num(3)), Num(4))) == "(2**3)**4"
        assert render_expression(Binary("**", Num(2), Binary("**", Num(3), Num(4)))) == "2**3**4"


class TestExtractBoxed:
    def test_last_boxed_wins(self):
        text = r"first \boxed{1} then ... the number of such circles is 6. \[\boxed{6}\]"
        assert extract_boxed(text) == "6"

    def test_absent(self):
        assert extract_boxed("no answer here") is None

    def test_nested_braces(self):
        assert extract_boxed(r"\boxed{(x, y) = (1, \sqrt{15})}") == r"(x, y) = (1, \sqrt{15})"

    def test_unbalanced_raises(self):
        with pytest.raises(UnbalancedBraces):
            extract_boxed(r"\boxed{(1, \sqrt{15}")

    def test_result_braces_are_balanced(self):
        content = extract_boxed(r"\boxed{\frac{1}{2}}")
        assert content.count("{") == content.count("}")

    def test_whitespace_before_brace(self):
        assert extract_boxed("\\boxed {42}") == "42"


class TestNormalization:
    @pytest.mark.parametrize(
        "latex,expected",
        [
            (r"\frac{3}{4}", "((3)/(4))"),
            (r"2\sqrt{3}", "2* sqrt(3)"),
            (r"\left[ 1, 2 \right]", "[ 1, 2 ]"),
        ],
    )
    def test_rewrites_parse(self, latex, expected):
        out = normalize_answer_text(latex)
        parse_expression(out)  # must be dialect-parseable

    def test_naming_clause_stripped(self):
        out = normalize_answer_text("x = 5")
        assert out == "5"

    def test_plus_minus_expands_to_pair(self):
        out = normalize_answer_text(r"\pm 2")
        node = parse_expression(out)
        assert isinstance(node, Aggregate) and len(node.elements) == 2


class TestEquivalence:
    @pytest.mark.parametrize("left,right,expected", CORPUS)
    def test_corpus(self, left, right, expected):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", DialectWarning)
            verdict = equivalence_check(left, right)
        assert verdict.outcome == expected, verdict.note

    @pytest.mark.parametrize("left,right,expected", CORPUS)
    def test_symmetric_outcomes(self, left, right, expected):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", DialectWarning)
            assert equivalence_check(left, right).outcome == equivalence_check(right, left).outcome

    @pytest.mark.parametrize("text", sorted({a for a, _, _ in CORPUS}))
    def test_reflexive(self, text):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", DialectWarning)
            assert equivalence_check(text, text).outcome == "equivalent"

    def test_deterministic_under_fixed_seed(self):
        policy = EquivalencePolicy(seed=99)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", DialectWarning)
            first = [equivalence_check(a, b, policy).outcome for a, b, _ in CORPUS]
            second = [equivalence_check(a, b, policy).outcome for a, b, _ in CORPUS]
        assert first == second

    def test_unknown_when_disabled(self):
        policy = EquivalencePolicy(methods=("exact",))
        assert equivalence_check("1/2", "0.5", policy).outcome == "unknown"

    def test_verdict_method_labels(self):
        assert equivalence_check("6", "6").method == "exact"
        assert equivalence_check("1024 - 256*pi", "256*(4 - pi)").method == "numeric-sampling"
