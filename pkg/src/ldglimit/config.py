"""Flat key=value experiment configuration with exact round-trip
serialization."""

from __future__ import annotations

from dataclasses import dataclass, fields


@dataclass
class ExperimentConfig:
    """Everything needed to reproduce a sweep run."""

    a2: float = 1.0
    b2: float = 1.0
    c2: float = 1.0
    l_ladder: tuple[float, ...] = (0.16, 0.08, 0.04, 0.02)
    dims: tuple[int, int, int] = (16, 16, 16)
    box_lo: float = 0.0
    box_hi: float = 8.0
    boundary: str = "near_constant"
    eps: float = 0.2
    pattern: str = "tilt_x"
    dt_safety: float = 0.9
    max_iters: int = 50000
    rel_energy_tol: float = 1e-13
    residual_tol: float = 1e-7
    log_every: int = 0
    margin: float = 2.0
    output_dir: str = "out"
    seed: int = 0

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        for name in ("a2", "b2", "c2"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        ladder = tuple(float(v) for v in self.l_ladder)
        if len(ladder) == 0:
            raise ValueError("l_ladder must be nonempty")
        if any(v <= 0 for v in ladder):
            raise ValueError("l_ladder entries must be positive")
        if any(nxt >= prev for prev, nxt in zip(ladder, ladder[1:])):
            raise ValueError("l_ladder must be strictly decreasing")
        if len(self.dims) != 3 or any(d < 3 for d in self.dims):
            raise ValueError("dims must be three integers >= 3")
        if self.box_hi <= self.box_lo:
            raise ValueError("box_hi must exceed box_lo")
        if self.boundary not in ("near_constant", "hedgehog"):
            raise ValueError(f"unknown boundary {self.boundary!r}")
        if self.eps < 0:
            raise ValueError("eps must be nonnegative")
        h = (self.box_hi - self.box_lo) / (min(self.dims) + 1)
        if self.margin < 0:
            raise ValueError("margin must be nonnegative")
        if self.margin and self.margin < 2.0 * h:
            raise ValueError("margin must be 0 or at least two node spacings")
        if self.margin >= (self.box_hi - self.box_lo) / 2.0:
            raise ValueError("margin must be below half the box width")

    def serialize(self) -> str:
        """One key=value pair per line, in field order."""
        lines = []
        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(v, tuple):
                txt = ",".join(_fmt(x) for x in v)
            else:
                txt = _fmt(v)
            lines.append(f"{f.name}={txt}")
        return "\n".join(lines) + "\n"

    def save(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.serialize())


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.17g}"
    return str(v)


_FLOAT_KEYS = {
    "a2", "b2", "c2", "box_lo", "box_hi", "eps", "dt_safety",
    "rel_energy_tol", "residual_tol", "margin",
}
_INT_KEYS = {"max_iters", "log_every", "seed"}
_STR_KEYS = {"boundary", "pattern", "output_dir"}


def parse_config(text: str) -> ExperimentConfig:
    """Parse serialized key=value lines; unknown keys raise ValueError."""
    known = {f.name for f in fields(ExperimentConfig)}
    kwargs = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected key=value, got {raw!r}")
        key, val = (part.strip() for part in line.split("=", 1))
        if key not in known:
            raise ValueError(f"line {lineno}: unknown key {key!r}")
        if key in kwargs:
            raise ValueError(f"line {lineno}: duplicate key {key!r}")
        if key in _FLOAT_KEYS:
            kwargs[key] = float(val)
        elif key in _INT_KEYS:
            kwargs[key] = int(val)
        elif key in _STR_KEYS:
            kwargs[key] = val
        elif key == "l_ladder":
            kwargs[key] = tuple(float(x) for x in val.split(","))
        elif key == "dims":
            kwargs[key] = tuple(int(x) for x in val.split(","))
    return ExperimentConfig(**kwargs)


def load_config(path) -> ExperimentConfig:
    with open(path) as fh:
        return parse_config(fh.read())
