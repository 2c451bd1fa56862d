"""Protobuf text-format subset used by Caffe prototxt files.

Grammar:

    message := field*
    field   := IDENT ( ':' scalar | ':'? '{' message '}' )
    scalar  := STRING | NUMBER | IDENT

``#`` starts a comment running to end of line, whitespace is insignificant,
and repeated field names accumulate in order.  Extensions (``[ext]``),
angle-bracket message delimiters, and multi-line string concatenation are
out of scope; Caffe files do not use them.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

from netforge.errors import NetforgeError


@dataclass(frozen=True)
class SourceSpan:
    """Byte offsets plus 1-based line/column, attached to every node."""

    start: int
    end: int
    line: int
    column: int

    def __post_init__(self):
        if self.start > self.end:
            raise ValueError("span start > end")


class TextProtoError(NetforgeError):
    """Syntax error with location info."""

    def __init__(self, message, span):
        super().__init__(f"{message} (line {span.line}, column {span.column})")
        self.raw_message = message
        self.span = span


class UnterminatedString(TextProtoError):
    pass


class UnterminatedBlock(TextProtoError):
    pass


class Node:
    """Base of the parse-tree union; concrete kinds below."""

    __slots__ = ("span",)


class Str(Node):
    __slots__ = ("value",)

    def __init__(self, value, span=None):
        self.value = value
        self.span = span

    def __eq__(self, other):
        return isinstance(other, Str) and self.value == other.value

    def __repr__(self):
        return f"Str({self.value!r})"


class Num(Node):
    __slots__ = ("value",)

    def __init__(self, value, span=None):
        self.value = value  # int parsed exactly, otherwise float
        self.span = span

    def __eq__(self, other):
        # 1 and 1.0 are distinct: integer literals must round-trip as integers
        return (
            isinstance(other, Num)
            and type(self.value) is type(other.value)
            and self.value == other.value
        )

    def __repr__(self):
        return f"Num({self.value!r})"


class Ident(Node):
    """Bare identifier value: enum member or true/false."""

    __slots__ = ("name",)

    def __init__(self, name, span=None):
        self.name = name
        self.span = span

    def __eq__(self, other):
        return isinstance(other, Ident) and self.name == other.name

    def __repr__(self):
        return f"Ident({self.name!r})"


class Message(Node):
    """Ordered multimap of field name to child node."""

    __slots__ = ("fields",)

    def __init__(self, fields=None, span=None):
        self.fields = list(fields or [])  # list of (name, Node)
        self.span = span

    def __eq__(self, other):
        return isinstance(other, Message) and self.fields == other.fields

    def __repr__(self):
        return f"Message({self.fields!r})"

    def get(self, name):
        """First value for name, or None."""
        for key, val in self.fields:
            if key == name:
                return val
        return None

    def get_all(self, name):
        return [val for key, val in self.fields if key == name]

    def add(self, name, node):
        self.fields.append((name, node))
        return self


_IDENT_START = set("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ_")
_IDENT_CONT = _IDENT_START | set("0123456789.")
_NUM_START = set("0123456789+-.")

_ESCAPES = {"n": "\n", "t": "\t", '"': '"', "'": "'", "\\": "\\", "r": "\r"}
_REVERSE_ESCAPES = {"\n": "\\n", "\t": "\\t", '"': '\\"', "\\": "\\\\", "\r": "\\r"}


@dataclass
class _Token:
    kind: str  # IDENT NUMBER STRING PUNCT EOF
    text: str
    value: object
    span: SourceSpan


class _Tokenizer:
    def __init__(self, text):
        if text.startswith("﻿"):
            text = text[1:]
        self.text = text
        self.pos = 0
        self.line = 1
        self.col = 1

    def _span(self, start, start_line, start_col):
        return SourceSpan(start, self.pos, start_line, start_col)

    def _advance(self, n=1):
        for _ in range(n):
            if self.pos < len(self.text):
                if self.text[self.pos] == "\n":
                    self.line += 1
                    self.col = 1
                else:
                    self.col += 1
                self.pos += 1

    def _skip_trivia(self):
        while self.pos < len(self.text):
            ch = self.text[self.pos]
            if ch in " \t\r\n,":
                # commas are tolerated as field separators
                self._advance()
            elif ch == "#":
                while self.pos < len(self.text) and self.text[self.pos] != "\n":
                    self._advance()
            else:
                return

    def next_token(self):
        self._skip_trivia()
        start, line, col = self.pos, self.line, self.col
        if self.pos >= len(self.text):
            return _Token("EOF", "", None, SourceSpan(start, start, line, col))
        ch = self.text[self.pos]
        if ch in "{}:":
            self._advance()
            return _Token("PUNCT", ch, ch, self._span(start, line, col))
        if ch in ('"', "'"):
            return self._string(start, line, col)
        if ch in _IDENT_START:
            while self.pos < len(self.text) and self.text[self.pos] in _IDENT_CONT:
                self._advance()
            text = self.text[start : self.pos]
            return _Token("IDENT", text, text, self._span(start, line, col))
        if ch in _NUM_START:
            return self._number(start, line, col)
        self._advance()
        raise TextProtoError(
            f"unexpected character {ch!r}", self._span(start, line, col)
        )

    def _string(self, start, line, col):
        quote = self.text[self.pos]
        self._advance()
        out = []
        while True:
            if self.pos >= len(self.text) or self.text[self.pos] == "\n":
                raise UnterminatedString(
                    "unterminated string literal", self._span(start, line, col)
                )
            ch = self.text[self.pos]
            if ch == quote:
                self._advance()
                break
            if ch == "\\":
                self._advance()
                if self.pos >= len(self.text):
                    raise UnterminatedString(
                        "unterminated string literal", self._span(start, line, col)
                    )
                esc = self.text[self.pos]
                out.append(_ESCAPES.get(esc, esc))
                self._advance()
            else:
                out.append(ch)
                self._advance()
        return _Token("STRING", self.text[start : self.pos], "".join(out), self._span(start, line, col))

    def _number(self, start, line, col):
        text = self.text
        if text[self.pos] in "+-":
            self._advance()
        saw_digit = False
        while self.pos < len(text) and text[self.pos].isdigit():
            saw_digit = True
            self._advance()
        is_float = False
        if self.pos < len(text) and text[self.pos] == ".":
            is_float = True
            self._advance()
            while self.pos < len(text) and text[self.pos].isdigit():
                saw_digit = True
                self._advance()
        if self.pos < len(text) and text[self.pos] in "eE":
            mark = self.pos
            self._advance()
            if self.pos < len(text) and text[self.pos] in "+-":
                self._advance()
            if self.pos < len(text) and text[self.pos].isdigit():
                is_float = True
                while self.pos < len(text) and text[self.pos].isdigit():
                    self._advance()
            else:
                # not an exponent after all; rewind is not possible with the
                # streaming cursor, so reject outright
                raise TextProtoError(
                    "malformed number literal",
                    SourceSpan(start, mark + 1, line, col),
                )
        raw = text[start : self.pos]
        if not saw_digit:
            raise TextProtoError(
                f"malformed number literal {raw!r}", self._span(start, line, col)
            )
        value = float(raw) if is_float else int(raw)
        return _Token("NUMBER", raw, value, self._span(start, line, col))


class _Parser:
    def __init__(self, text):
        self._tok = _Tokenizer(text)
        self.current = self._tok.next_token()

    def _bump(self):
        tok = self.current
        self.current = self._tok.next_token()
        return tok

    def parse_root(self):
        start_span = self.current.span
        fields = self._parse_fields(stop_at_brace=False)
        end = self.current.span
        return Message(fields, SourceSpan(start_span.start, end.end, start_span.line, start_span.column))

    def _parse_fields(self, stop_at_brace):
        fields = []
        while True:
            tok = self.current
            if tok.kind == "EOF":
                return fields
            if tok.kind == "PUNCT" and tok.text == "}":
                if stop_at_brace:
                    return fields
                raise TextProtoError("unmatched '}'", tok.span)
            if tok.kind != "IDENT":
                raise TextProtoError(
                    f"expected field name, got {tok.text or 'end of input'!r}", tok.span
                )
            name_tok = self._bump()
            fields.append((name_tok.value, self._parse_value(name_tok)))

    def _parse_value(self, name_tok):
        tok = self.current
        if tok.kind == "PUNCT" and tok.text == ":":
            self._bump()
            tok = self.current
            if tok.kind == "PUNCT" and tok.text == "{":
                return self._parse_block()
            return self._parse_scalar()
        if tok.kind == "PUNCT" and tok.text == "{":
            return self._parse_block()
        raise TextProtoError(
            f"expected ':' or '{{' after field name {name_tok.value!r}", tok.span
        )

    def _parse_block(self):
        open_tok = self._bump()
        fields = self._parse_fields(stop_at_brace=True)
        close = self.current
        if not (close.kind == "PUNCT" and close.text == "}"):
            raise UnterminatedBlock("unterminated message block", open_tok.span)
        self._bump()
        return Message(
            fields,
            SourceSpan(open_tok.span.start, close.span.end, open_tok.span.line, open_tok.span.column),
        )

    def _parse_scalar(self):
        tok = self.current
        if tok.kind == "STRING":
            self._bump()
            return Str(tok.value, tok.span)
        if tok.kind == "NUMBER":
            self._bump()
            return Num(tok.value, tok.span)
        if tok.kind == "IDENT":
            self._bump()
            return Ident(tok.value, tok.span)
        raise TextProtoError(
            f"expected string, number, or identifier, got {tok.text or 'end of input'!r}",
            tok.span,
        )


def parse_textproto(text: str) -> Message:
    """Parse UTF-8 text into the root Message.

    Raises TextProtoError (or its UnterminatedString / UnterminatedBlock
    subclasses) with a SourceSpan on malformed input.
    """
    return _Parser(text).parse_root()


def _escape(value):
    return "".join(_REVERSE_ESCAPES.get(ch, ch) for ch in value)


def _format_number(value):
    if isinstance(value, int):
        return str(value)
    # repr keeps doubles exact; strip float noise like '1.0' -> keep as is
    return repr(value)


def _print_fields(fields, indent, out):
    pad = "  " * indent
    for name, node in fields:
        if isinstance(node, Message):
            out.append(f"{pad}{name} {{\n")
            _print_fields(node.fields, indent + 1, out)
            out.append(f"{pad}}}\n")
        elif isinstance(node, Str):
            out.append(f'{pad}{name}: "{_escape(node.value)}"\n')
        elif isinstance(node, Num):
            out.append(f"{pad}{name}: {_format_number(node.value)}\n")
        elif isinstance(node, Ident):
            out.append(f"{pad}{name}: {node.name}\n")
        else:  # pragma: no cover - union is closed
            raise TypeError(f"unexpected node {node!r}")


def print_textproto(node: Message) -> str:
    """Pretty-print a Message with two-space indentation.

    parse_textproto(print_textproto(n)) is structurally equal to n.
    """
    out = []
    _print_fields(node.fields, 0, out)
    return "".join(out)
