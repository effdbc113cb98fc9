"""Hand-verified answer-equivalence corpus.

Every expected verdict was checked by hand; the numeric ones were
additionally confirmed with an independent 50-digit evaluation before
being frozen here. The acceptance suite requires a 100% match.
"""

EQUIVALENT = "equivalent"
DIFFERENT = "different"
UNKNOWN = "unknown"

# (left, right, expected outcome)
CORPUS = [
    # equivalent: identity and trivial formatting
    ("6", "6", EQUIVALENT),
    ("  2022 ", "2022", EQUIVALENT),
    ("True", "True", EQUIVALENT),
    # equivalent: constant arithmetic at high precision
    ("1024 - 256*pi", "256*(4 - pi)", EQUIVALENT),
    ("sqrt(15)", "15**(1/2)", EQUIVALENT),
    ("1/2", "0.5", EQUIVALENT),
    ("0.5", "1/2", EQUIVALENT),
    ("sqrt(2)/2", "1/sqrt(2)", EQUIVALENT),
    ("Abs(-4)", "4", EQUIVALENT),
    ("I**2", "-1", EQUIVALENT),
    ("E**2", "exp(2)", EQUIVALENT),
    # equivalent: free variables via sampling
    ("x**2 - 1", "(x-1)*(x+1)", EQUIVALENT),
    ("x + 1", "x + 1 + 1e-15", EQUIVALENT),  # inside the absolute floor
    ("(x > 2) | (x < -2)", "Abs(x) > 2", EQUIVALENT),
    # equivalent: collections and serialized constructor forms
    ("(4, 0)", "Tuple(Integer(4), Integer(0))", EQUIVALENT),
    ("[(1, sqrt(15)), (1, -sqrt(15))]", "{(1, -sqrt(15)), (1, sqrt(15))}", EQUIVALENT),
    (
        "Tuple(Integer(1), Pow(Integer(15), Rational(1, 2))), "
        "Tuple(Integer(1), Mul(Integer(-1), Pow(Integer(15), Rational(1, 2))))",
        "{(1, sqrt(15)), (1, -sqrt(15))}",
        EQUIVALENT,
    ),
    ("[6]", "6", EQUIVALENT),  # singleton collection unwraps
    # equivalent: LaTeX answers normalize into the dialect
    (r"\sqrt{15}", "sqrt(15)", EQUIVALENT),
    (r"\frac{3}{4}", "3/4", EQUIVALENT),
    (r"2\pi", "2*pi", EQUIVALENT),
    (r"\pm\sqrt{3}", "{sqrt(3), -sqrt(3)}", EQUIVALENT),
    (r"x = \pm\frac{1}{2}", "{-1/2, 1/2}", EQUIVALENT),
    (
        r"(x, y) = (1, \sqrt{15}) \quad \text{and} \quad (1, -\sqrt{15})",
        "[(1, sqrt(15)), (1, -sqrt(15))]",
        EQUIVALENT,
    ),
    # different: the area-problem confusion pair and friends
    ("256 - 256*pi", "1024 - 256*pi", DIFFERENT),
    ("256*(1 - pi)", "1024 - 256*pi", DIFFERENT),
    ("sqrt(15)", "-sqrt(15)", DIFFERENT),
    ("6", "8", DIFFERENT),
    ("pi", "3.14", DIFFERENT),
    ("1/2", "0.4999", DIFFERENT),
    ("x**2", "x**3", DIFFERENT),
    ("2*x", "2*y", DIFFERENT),
    ("Abs(x)", "x", DIFFERENT),
    ("x > 2", "x > 1", DIFFERENT),
    ("(4, 0)", "(0, 4)", DIFFERENT),
    ("[(1, sqrt(15))]", "[(1, sqrt(15)), (1, -sqrt(15))]", DIFFERENT),
    # unknown: the local checker must abstain, not guess
    ("six", "6", UNKNOWN),
    ("no real solutions exist", "0", UNKNOWN),
    ("gamma(x)", "x", UNKNOWN),
]
