"""Tokenizer for the restricted CAD scripting language.

Line-oriented with Python-style significant indentation: physical lines
become statement tokens terminated by NEWLINE, and indentation changes
emit INDENT/DEDENT pairs.  Only spaces may indent; ``#`` starts a comment.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..errors import ScriptParseError

KEYWORDS = {"for", "in", "True", "False"}

# Host-language keywords outside the grammar; naming them in a script is a
# hard rejection rather than an unknown-identifier runtime error.
RESERVED = {
    "import", "from", "def", "while", "if", "elif", "else", "class",
    "return", "lambda", "with", "try", "except", "finally", "raise",
    "global", "nonlocal", "yield", "del", "pass", "assert", "and", "or",
    "not", "is", "None", "break", "continue", "async", "await",
}

OPERATORS = ("**", "=", "+", "-", "*", "/", ".")
DELIMS = "()[],:"

_ESCAPES = {"\\": "\\", "'": "'", '"': '"', "n": "\n", "t": "\t"}


@dataclass(frozen=True)
class Token:
    kind: str  # ident | number | string | keyword | operator | delimiter | newline | indent | dedent | eof
    lexeme: str
    span: tuple
    line: int
    col: int

    def __repr__(self) -> str:
        return f"Token({self.kind}, {self.lexeme!r}, line {self.line})"


def _is_ident_start(c: str) -> bool:
    return c.isalpha() or c == "_"


def _is_ident(c: str) -> bool:
    return c.isalnum() or c == "_"


def tokenize(source: str) -> list:
    """Token stream for ``source``; raises ``ScriptParseError`` on bad input."""
    tokens = []
    indents = [0]
    pos = 0
    line_no = 0
    n = len(source)
    lines = source.split("\n")
    for raw in lines:
        line_no += 1
        line_start = pos
        # Measure indentation.
        i = 0
        while i < len(raw) and raw[i] in " \t":
            if raw[i] == "\t":
                raise ScriptParseError(
                    "tab in indentation (use spaces)", line=line_no, col=i + 1
                )
            i += 1
        stripped = raw[i:]
        if not stripped or stripped.startswith("#"):
            pos = line_start + len(raw) + 1
            continue
        indent = i
        if indent > indents[-1]:
            indents.append(indent)
            tokens.append(Token("indent", "", (line_start, line_start + i), line_no, 1))
        else:
            while indent < indents[-1]:
                indents.pop()
                tokens.append(Token("dedent", "", (line_start, line_start), line_no, 1))
            if indent != indents[-1]:
                raise ScriptParseError("unindent does not match any outer level", line=line_no, col=i + 1)
        while i < len(raw):
            c = raw[i]
            start = line_start + i
            col = i + 1
            if c == " ":
                i += 1
                continue
            if c == "#":
                break
            if _is_ident_start(c):
                j = i + 1
                while j < len(raw) and _is_ident(raw[j]):
                    j += 1
                word = raw[i:j]
                if word in KEYWORDS or word in RESERVED:
                    kind = "keyword"
                else:
                    kind = "ident"
                tokens.append(Token(kind, word, (start, line_start + j), line_no, col))
                i = j
                continue
            if c.isdigit() or (c == "." and i + 1 < len(raw) and raw[i + 1].isdigit()):
                j = i
                seen_dot = seen_exp = False
                while j < len(raw):
                    ch = raw[j]
                    if ch.isdigit():
                        j += 1
                    elif ch == "." and not seen_dot and not seen_exp:
                        seen_dot = True
                        j += 1
                    elif ch in "eE" and not seen_exp and j > i:
                        seen_exp = True
                        j += 1
                        if j < len(raw) and raw[j] in "+-":
                            j += 1
                    else:
                        break
                text = raw[i:j]
                try:
                    float(text)
                except ValueError:
                    raise ScriptParseError(f"bad number {text!r}", line=line_no, col=col)
                tokens.append(Token("number", text, (start, line_start + j), line_no, col))
                i = j
                continue
            if c in "'\"":
                quote = c
                j = i + 1
                value = []
                while j < len(raw):
                    ch = raw[j]
                    if ch == "\\":
                        if j + 1 >= len(raw) or raw[j + 1] not in _ESCAPES:
                            raise ScriptParseError("bad escape in string", line=line_no, col=j + 1)
                        value.append(_ESCAPES[raw[j + 1]])
                        j += 2
                    elif ch == quote:
                        break
                    else:
                        value.append(ch)
                        j += 1
                else:
                    raise ScriptParseError("unterminated string", line=line_no, col=col)
                tokens.append(
                    Token("string", "".join(value), (start, line_start + j + 1), line_no, col)
                )
                i = j + 1
                continue
            matched = None
            for op in OPERATORS:
                if raw.startswith(op, i):
                    matched = op
                    break
            if matched:
                tokens.append(
                    Token("operator", matched, (start, start + len(matched)), line_no, col)
                )
                i += len(matched)
                continue
            if c in DELIMS:
                tokens.append(Token("delimiter", c, (start, start + 1), line_no, col))
                i += 1
                continue
            raise ScriptParseError(f"illegal character {c!r}", line=line_no, col=col)
        end = line_start + len(raw)
        tokens.append(Token("newline", "", (end, end), line_no, len(raw) + 1))
        pos = line_start + len(raw) + 1
    while len(indents) > 1:
        indents.pop()
        tokens.append(Token("dedent", "", (n, n), line_no, 1))
    tokens.append(Token("eof", "", (n, n), line_no, 1))
    return tokens
