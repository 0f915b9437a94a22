"""Plain-text grammar for symbols and test functions.

Symbols serialize to a single-line term grammar used both standalone and as
config values; floats are written with repr so parsing reproduces them bit
for bit.

    poly{n=2; m=-1,0; j=0 t=1.0: term a=(0,0) [(0,0)=1.0,0.0 (1,0)=0.5,-0.0];
         j=1 t=1.0: term a=(2,0) [(0,0)=0.25,0.0]}

Test functions use nested call syntax over the named primitives:

    bump(1.0,2.0,1.0)   plateau(-0.5,-0.25,1.0,1.5)   poly(0.0,1.0)
    scale(2.0,bump(1.0,2.0,1.0))   sum(f,g)   product(f,g)   exp(-1.0)
    rise(0.0,1.0)   fall(1.0,2.0)
"""

from __future__ import annotations

import re

from .fourier import TorusFourierSeries
from .symbols import CutoffSpec, HomogeneousSymbol, PolyHomogeneousSymbol
from . import testfunctions as tf


# ---------------------------------------------------------------------------
# symbols
# ---------------------------------------------------------------------------

def _fmt_complex(z: complex) -> str:
    z = complex(z)
    return f"{z.real!r},{z.imag!r}"


def _parse_complex(text: str) -> complex:
    re_part, im_part = text.split(",")
    return complex(float(re_part), float(im_part))


def _fmt_tuple(t) -> str:
    return "(" + ",".join(str(int(v)) for v in t) + ")"


def _parse_tuple(text: str) -> tuple[int, ...]:
    return tuple(int(v) for v in text.strip("()").split(",") if v != "")


def format_homogeneous(h: HomogeneousSymbol) -> str:
    parts = []
    for alpha, coeff in sorted(h.terms.items()):
        entries = " ".join(
            f"{_fmt_tuple(g)}={_fmt_complex(a)}"
            for g, a in sorted(coeff.coeffs.items())
        )
        parts.append(f"term a={_fmt_tuple(alpha)} [{entries}]")
    return " ".join(parts)


_TERM_RE = re.compile(r"term a=(\([^)]*\)) \[([^\]]*)\]")
_ENTRY_RE = re.compile(r"(\([^)]*\))=([^\s]+)")


def parse_homogeneous(n: int, degree: complex, text: str) -> HomogeneousSymbol:
    terms = {}
    for alpha_text, entries in _TERM_RE.findall(text):
        alpha = _parse_tuple(alpha_text)
        coeffs = {}
        for g_text, val_text in _ENTRY_RE.findall(entries):
            coeffs[_parse_tuple(g_text)] = _parse_complex(val_text)
        terms[alpha] = TorusFourierSeries(n, coeffs)
    return HomogeneousSymbol(n, degree, terms)


def format_symbol(sym: PolyHomogeneousSymbol) -> str:
    chunks = [f"n={sym.n}", f"m={_fmt_complex(sym.order)}"]
    comps = []
    for j in range(sym.depth):
        h = sym.component(j)
        cut = sym.cutoff(j)
        comps.append(f"j={j} t={cut.t!r}: {format_homogeneous(h)}")
    return "poly{" + "; ".join(chunks + comps) + "}"


def parse_symbol(text: str) -> PolyHomogeneousSymbol:
    text = text.strip()
    if not (text.startswith("poly{") and text.endswith("}")):
        raise ValueError(f"not a symbol literal: {text[:40]}...")
    body = text[len("poly{"):-1]
    fields = [part.strip() for part in body.split(";")]
    n = None
    order = None
    comps: list[tuple[int, float, str]] = []
    for part in fields:
        if part.startswith("n="):
            n = int(part[2:])
        elif part.startswith("m="):
            order = _parse_complex(part[2:])
        elif part.startswith("j="):
            header, _, rest = part.partition(":")
            bits = dict(kv.split("=") for kv in header.split())
            comps.append((int(bits["j"]), float(bits["t"]), rest.strip()))
        elif part:
            raise ValueError(f"unrecognized symbol field: {part!r}")
    if n is None or order is None:
        raise ValueError("symbol literal missing n= or m=")
    comps.sort()
    expected = list(range(len(comps)))
    if [j for j, _, _ in comps] != expected:
        raise ValueError("symbol components must cover j = 0..J contiguously")
    components = []
    for j, t, term_text in comps:
        h = parse_homogeneous(n, order - j, term_text)
        components.append((h, CutoffSpec(t)))
    return PolyHomogeneousSymbol(n, order, components)


# ---------------------------------------------------------------------------
# test functions
# ---------------------------------------------------------------------------

def format_function(f: tf.TestFunction) -> str:
    return f.spec()


def _split_args(body: str) -> list[str]:
    args = []
    depth = 0
    current = []
    for ch in body:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch == "," and depth == 0:
            args.append("".join(current))
            current = []
        else:
            current.append(ch)
    if current:
        args.append("".join(current))
    return [a.strip() for a in args]


def parse_function(text: str) -> tf.TestFunction:
    text = text.strip()
    match = re.match(r"^([a-z_]+)\((.*)\)$", text, re.S)
    if not match:
        raise ValueError(f"cannot parse function literal: {text!r}")
    name, body = match.group(1), match.group(2)
    args = _split_args(body) if body.strip() else []

    def num(i):
        return float(args[i])

    if name == "bump":
        height = num(2) if len(args) > 2 else 1.0
        return tf.bump(num(0), num(1), height)
    if name == "plateau":
        return tf.plateau(num(0), num(1), num(2), num(3))
    if name == "rise":
        return tf.smoothstep_rise(num(0), num(1))
    if name == "fall":
        return tf.smoothstep_fall(num(0), num(1))
    if name == "poly":
        return tf.poly(*[float(a) for a in args])
    if name == "exp":
        return tf.exponential(num(0))
    if name == "scale":
        return float(args[0]) * parse_function(args[1])
    if name == "sum":
        out = parse_function(args[0])
        for extra in args[1:]:
            out = out + parse_function(extra)
        return out
    if name == "product":
        out = parse_function(args[0])
        for extra in args[1:]:
            out = out * parse_function(extra)
        return out
    # raw node spellings produced by TestFunction.spec() round-trip too
    if name == "affine":
        inner = parse_function(args[0])
        return tf.TestFunction(tf._Affine(inner.root, float(args[1]), float(args[2])))
    if name == "smoothstep":
        return tf.TestFunction(tf._Smoothstep())
    if name == "bumpcore":
        return tf.TestFunction(tf._BumpCore())
    raise ValueError(f"unknown function primitive {name!r}")
