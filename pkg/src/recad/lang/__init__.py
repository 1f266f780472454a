"""Restricted CAD scripting language: tokenizer, parser, sandbox, emitter."""

from .emitter import emit_hardcoded, emit_model
from .interpreter import ExecLimits, execute
from .parser import ScriptAst, parse
from .tokens import Token, tokenize

__all__ = [
    "ExecLimits",
    "ScriptAst",
    "Token",
    "emit_hardcoded",
    "emit_model",
    "execute",
    "parse",
    "tokenize",
]
