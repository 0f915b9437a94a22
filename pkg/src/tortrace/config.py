"""Line-oriented experiment configuration.

Sections open with [name]; entries are key = value lines; blank lines and
#-comments are ignored.  Symbol values use the term grammar of
tortrace.serialize, function values its call grammar.  Round-tripping a
parsed config through to_text reproduces the parsed content exactly.

Example:

    [problem]
    n = 2
    mode = res
    A = poly{n=2; m=-2.0,0.0; j=0 t=1.0: term a=(0,0) [(0,0)=1.0,0.0]}
    L = poly{n=2; m=2.0,0.0; j=0 t=1.0: term a=(2,0) [(0,0)=1.0,0.0] term a=(0,2) [(0,0)=1.0,0.0]}
    c0 = 0.9
    f = bump(1.0,2.0,1.0)

    [run]
    t_min = 1e-05
    t_max = 0.001
    t_count = 24
    order_count = 3
    truncation = 0
    coeff_rtol = 0.005

    [output]
    directory = out
    plots = yes
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from .serialize import format_function, format_symbol, parse_function, parse_symbol
from .symbols import EllipticOperator, PolyHomogeneousSymbol
from .testfunctions import TestFunction


def parse_sections(text: str) -> dict[str, dict[str, str]]:
    sections: dict[str, dict[str, str]] = {}
    current = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("[") and line.endswith("]"):
            current = line[1:-1].strip()
            if current in sections:
                raise ValueError(f"duplicate section [{current}] (line {lineno})")
            sections[current] = {}
            continue
        if current is None:
            raise ValueError(f"entry before any section (line {lineno})")
        if "=" not in line:
            raise ValueError(f"expected key = value (line {lineno}): {line!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        if key in sections[current]:
            raise ValueError(f"duplicate key {key!r} in [{current}] (line {lineno})")
        sections[current][key] = value.strip()
    return sections


def _bool(value: str) -> bool:
    return value.lower() in ("1", "yes", "true", "on")


@dataclass
class ExperimentConfig:
    n: int
    mode: str                      # "res" (window) or "tr" (plateau)
    symbol: PolyHomogeneousSymbol  # the traced operator A
    operator_symbol: PolyHomogeneousSymbol
    c0: float
    function: TestFunction
    t_min: float = 1e-4
    t_max: float = 1e-2
    t_count: int = 12
    order_count: int = 2
    truncation: int = 0            # 0 = multiplier oracle, else matrix K
    coeff_rtol: float = 0.01
    magnitude_floor: float = 1e-8
    slope_slack: float = 0.05
    c1: float = 0.0
    out_dir: str = "out"
    plots: bool = True
    label: str = "experiment"

    def validate(self):
        if self.mode not in ("res", "tr"):
            raise ValueError(f"mode must be res or tr, got {self.mode!r}")
        if self.t_min <= 0 or self.t_max <= self.t_min:
            raise ValueError("need 0 < t_min < t_max")
        if self.t_count < 4:
            raise ValueError("need at least 4 t samples")
        for name in ("coeff_rtol", "magnitude_floor", "slope_slack"):
            if getattr(self, name) <= 0:
                raise ValueError(f"tolerance {name} must be positive")
        if self.symbol.n != self.n or self.operator_symbol.n != self.n:
            raise ValueError("symbol dimensions disagree with n")
        if self.truncation < 0:
            raise ValueError("truncation must be non-negative")

    def elliptic_operator(self) -> EllipticOperator:
        return EllipticOperator(self.operator_symbol, c0=self.c0, c1=self.c1)

    @classmethod
    def from_text(cls, text: str) -> "ExperimentConfig":
        sections = parse_sections(text)
        try:
            problem = sections["problem"]
            run = sections.get("run", {})
            output = sections.get("output", {})
        except KeyError as exc:
            raise ValueError(f"missing section {exc}") from None
        cfg = cls(
            n=int(problem["n"]),
            mode=problem.get("mode", "res"),
            symbol=parse_symbol(problem["A"]),
            operator_symbol=parse_symbol(problem["L"]),
            c0=float(problem.get("c0", "0.5")),
            c1=float(problem.get("c1", "0.0")),
            function=parse_function(problem["f"]),
            t_min=float(run.get("t_min", "1e-4")),
            t_max=float(run.get("t_max", "1e-2")),
            t_count=int(run.get("t_count", "12")),
            order_count=int(run.get("order_count", "2")),
            truncation=int(run.get("truncation", "0")),
            coeff_rtol=float(run.get("coeff_rtol", "0.01")),
            magnitude_floor=float(run.get("magnitude_floor", "1e-8")),
            slope_slack=float(run.get("slope_slack", "0.05")),
            out_dir=output.get("directory", "out"),
            plots=_bool(output.get("plots", "yes")),
            label=output.get("label", "experiment"),
        )
        cfg.validate()
        return cfg

    @classmethod
    def from_file(cls, path) -> "ExperimentConfig":
        return cls.from_text(Path(path).read_text())

    def to_text(self) -> str:
        lines = [
            "[problem]",
            f"n = {self.n}",
            f"mode = {self.mode}",
            f"A = {format_symbol(self.symbol)}",
            f"L = {format_symbol(self.operator_symbol)}",
            f"c0 = {self.c0!r}",
            f"c1 = {self.c1!r}",
            f"f = {format_function(self.function)}",
            "",
            "[run]",
            f"t_min = {self.t_min!r}",
            f"t_max = {self.t_max!r}",
            f"t_count = {self.t_count}",
            f"order_count = {self.order_count}",
            f"truncation = {self.truncation}",
            f"coeff_rtol = {self.coeff_rtol!r}",
            f"magnitude_floor = {self.magnitude_floor!r}",
            f"slope_slack = {self.slope_slack!r}",
            "",
            "[output]",
            f"directory = {self.out_dir}",
            f"plots = {'yes' if self.plots else 'no'}",
            f"label = {self.label}",
        ]
        return "\n".join(lines) + "\n"
