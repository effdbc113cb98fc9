"""Boxed-answer extraction and normalization of free-form answers.

Solution text ends with the machine-readable answer wrapped in
``\\boxed{...}``. The content is frequently LaTeX, so before any parsing we
push it through a fixed rewrite table into the expression dialect:
``\\sqrt{15}`` becomes ``sqrt(15)``, ``\\frac{a}{b}`` becomes ``(a)/(b)``,
``\\pm x`` expands to the two-element set ``{x, -x}``, and naming clauses
like ``(x, y) = ...`` are stripped down to their right-hand side.
"""

from __future__ import annotations

import re


class UnbalancedBraces(ValueError):
    """A ``\\boxed{`` opener with no matching closing brace."""


def extract_boxed(text: str) -> str | None:
    """Content of the last ``\\boxed{...}`` span, or None if there is none.

    Nested braces are balanced; an opener without a closer raises
    UnbalancedBraces.
    """
    starts = [m.start() for m in re.finditer(r"\\boxed", text)]
    for start in reversed(starts):
        i = start + len("\\boxed")
        while i < len(text) and text[i].isspace():
            i += 1
        if i >= len(text) or text[i] != "{":
            continue  # not a braced occurrence
        content, end = _read_brace_group(text, i)
        if end is None:
            raise UnbalancedBraces(f"\\boxed opened at offset {start} never closes")
        return content
    return None


def _read_brace_group(text: str, open_pos: int) -> tuple[str, int | None]:
    """Scan ``{...}`` starting at ``open_pos``; returns (content, end_index)."""
    depth = 0
    for i in range(open_pos, len(text)):
        c = text[i]
        if c == "{":
            depth += 1
        elif c == "}":
            depth -= 1
            if depth == 0:
                return text[open_pos + 1 : i], i + 1
    return "", None


# --- normalization to dialect text ---

_COMMAND_RE = re.compile(r"\\([A-Za-z]+)")

# latex command name -> dialect text; names not listed keep their bare name
_COMMAND_MAP = {
    "pm": "±",
    "mp": "±",
    "cdot": "*",
    "times": "*",
    "div": "/",
    "pi": "pi",
    "infty": "oo",
    "le": "<=",
    "leq": "<=",
    "ge": ">=",
    "geq": ">=",
    "quad": " ",
    "qquad": " ",
    "left": "",
    "right": "",
    "middle": "",
    "big": "",
    "Big": "",
    "bigg": "",
    "Bigg": "",
    "limits": "",
    "displaystyle": "",
}

_UNICODE_REWRITES = [
    ("π", "pi"),
    ("∞", "oo"),
    ("≤", "<="),
    ("≥", ">="),
    ("·", "*"),
    ("×", "*"),
    ("−", "-"),
    ("–", "-"),
    ("²", "**2"),
    ("³", "**3"),
]

_GROUP_COMMANDS = ("text", "textbf", "textit", "mathrm", "mathbf", "mathit", "operatorname")


def normalize_answer_text(text: str) -> str:
    """Rewrite a free-form (often LaTeX) answer into dialect text.

    Purely textual; the result may still fail to parse, in which case the
    equivalence checker reports Unknown.
    """
    s = text.strip()
    s = s.replace("$", "")
    s = s.replace("\\\\", ", ")
    s = s.replace("\\{", "{").replace("\\}", "}")
    s = s.replace("\\[", "[").replace("\\]", "]")
    s = s.replace("\\|", "|")
    s = re.sub(r"\\[,;:! ]", " ", s)
    s = _rewrite_frac(s)
    s = _rewrite_sqrt(s)
    for cmd in _GROUP_COMMANDS:
        s = _unwrap_group_command(s, cmd)
    s = _COMMAND_RE.sub(lambda m: _COMMAND_MAP.get(m.group(1), m.group(1)), s)
    for src, repl in _UNICODE_REWRITES:
        s = s.replace(src, repl)
    s = re.sub(r"√\s*\(", "sqrt(", s)
    s = re.sub(r"√\s*(\d+(?:\.\d+)?|[A-Za-z])", r"sqrt(\1)", s)
    s = s.replace("^", "**")
    s = _braces_after_power(s)
    s = re.sub(r"_\{([^{}]*)\}", r"_\1", s)
    s = re.sub(r"\s+(?:and|or)\s+", ", ", s, flags=re.IGNORECASE)
    s = re.sub(r"\s+", " ", s).strip().strip(";")

    elements = _split_top_level(s, ",")
    out: list[str] = []
    for element in elements:
        element = element.strip().rstrip(".;").strip()
        if not element:
            continue
        element = _rhs_of_naming(element)
        out.extend(_expand_plus_minus(element))
    out = [_repair_implicit_multiplication(e) for e in out if e]
    if not out:
        return ""
    if len(out) == 1:
        return out[0]
    return "{" + ", ".join(out) + "}"


def _rewrite_frac(s: str) -> str:
    while True:
        pos = max(s.rfind("\\frac"), s.rfind("\\dfrac"), s.rfind("\\tfrac"))
        if pos < 0:
            return s
        cmd_end = s.index("frac", pos) + 4
        i = cmd_end
        while i < len(s) and s[i].isspace():
            i += 1
        if i >= len(s) or s[i] != "{":
            return s  # malformed; leave for the parser to reject
        num, after_num = _read_brace_group(s, i)
        if after_num is None:
            return s
        j = after_num
        while j < len(s) and s[j].isspace():
            j += 1
        if j >= len(s) or s[j] != "{":
            return s
        den, after_den = _read_brace_group(s, j)
        if after_den is None:
            return s
        s = s[:pos] + f"(({num})/({den}))" + s[after_den:]


def _rewrite_sqrt(s: str) -> str:
    while True:
        pos = s.rfind("\\sqrt")
        if pos < 0:
            return s
        i = pos + len("\\sqrt")
        while i < len(s) and s[i].isspace():
            i += 1
        index = None
        if i < len(s) and s[i] == "[":
            end = s.find("]", i)
            if end < 0:
                return s
            index = s[i + 1 : end]
            i = end + 1
            while i < len(s) and s[i].isspace():
                i += 1
        if i >= len(s) or s[i] != "{":
            return s
        arg, after = _read_brace_group(s, i)
        if after is None:
            return s
        # leading space keeps a preceding command token (\pm\sqrt{3}) delimited
        if index:
            repl = f" (({arg}))**(1/({index}))"
        else:
            repl = f" sqrt({arg})"
        s = s[:pos] + repl + s[after:]


def _unwrap_group_command(s: str, cmd: str) -> str:
    marker = "\\" + cmd
    while True:
        pos = s.rfind(marker)
        if pos < 0:
            return s
        i = pos + len(marker)
        while i < len(s) and s[i].isspace():
            i += 1
        if i >= len(s) or s[i] != "{":
            s = s[:pos] + s[pos + len(marker):]
            continue
        content, after = _read_brace_group(s, i)
        if after is None:
            return s
        s = s[:pos] + " " + content + s[after:]


def _braces_after_power(s: str) -> str:
    while True:
        pos = s.find("**{")
        if pos < 0:
            return s
        content, after = _read_brace_group(s, pos + 2)
        if after is None:
            return s
        s = s[:pos] + f"**({content})" + s[after:]


def _split_top_level(s: str, sep: str) -> list[str]:
    parts: list[str] = []
    depth = 0
    current: list[str] = []
    for c in s:
        if c in "([{":
            depth += 1
        elif c in ")]}":
            depth -= 1
        if c == sep and depth == 0:
            parts.append("".join(current))
            current = []
        else:
            current.append(c)
    parts.append("".join(current))
    return parts


def _rhs_of_naming(element: str) -> str:
    """Strip a naming clause: ``(x, y) = (1, 2)`` -> ``(1, 2)``.

    Only bare top-level ``=`` counts; ``<=``, ``>=``, ``!=`` and ``==`` are
    left alone.
    """
    depth = 0
    last_eq = -1
    for i, c in enumerate(element):
        if c in "([{":
            depth += 1
        elif c in ")]}":
            depth -= 1
        elif c == "=" and depth == 0:
            if i > 0 and element[i - 1] in "<>!=":
                continue
            if i + 1 < len(element) and element[i + 1] == "=":
                continue
            last_eq = i
    if last_eq >= 0:
        return element[last_eq + 1 :].strip()
    return element


def _expand_plus_minus(element: str) -> list[str]:
    depth = 0
    positions = []
    for i, c in enumerate(element):
        if c in "([{":
            depth += 1
        elif c in ")]}":
            depth -= 1
        elif c == "±" and depth == 0:
            positions.append(i)
    if len(positions) != 1:
        return [element]
    i = positions[0]
    head, tail = element[:i].strip(), element[i + 1 :].strip()
    if not tail:
        return [element]
    if head:
        return [f"{head} + ({tail})", f"{head} - ({tail})"]
    return [tail, f"-({tail})"]


def _repair_implicit_multiplication(s: str) -> str:
    # 2x -> 2*x, 2(x) -> 2*(x), but keep scientific notation like 1e5 intact
    s = re.sub(r"(\d)\s*(?![eE][\d+\-])([A-Za-z(])", r"\1*\2", s)
    s = re.sub(r"\)\s*([A-Za-z0-9(])", r")*\1", s)
    return s
