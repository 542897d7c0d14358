"""YAML problem specs: parsing, validation with line numbers, and canonical emission.

Grammar (every key other than ``task`` is optional where it makes sense)::

    task: pp | multicast | gaussian | segment | verify
    name: free text
    channels:                        # not used by the gaussian task
      - {kind: bsc, eps: 0.12}
      - {kind: z, eps0: 0.3}
      - {kind: matrix, rows: [[0.9, 0.1], [0.2, 0.8]]}
    energy: hamming                  # or one vector per channel
    constraints: 0.3                 # common B
    constraints: [0.2, 0.3]          # one B per receiver
    constraints: {start: 0, stop: 0.7, steps: 51}   # common-B sweep, steps = point count
    options: {K: 2, objective: capacity, sigmas: [1, 1.5], peak: 1, grid_size: 65}
"""
from __future__ import annotations

import hashlib
import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import yaml

from .channels import Dmc, EnergyFunctional, MulticastProblem, hamming_energy, make_bsc, make_z
from .gaussian import GaussianMulticast

TASKS = ("pp", "multicast", "gaussian", "segment", "verify")
OBJECTIVES = ("capacity", "loss")
_TOP = ("task", "name", "channels", "energy", "constraints", "options")
_KINDS = {"bsc": ("eps",), "z": ("eps0",), "matrix": ("rows",)}
_GRID = ("start", "stop", "steps")
_OPTIONS = ("K", "objective", "sigmas", "peak", "grid_size")

__all__ = [
    "SpecError",
    "SpecWarning",
    "ChannelSpec",
    "ConstraintSpec",
    "Options",
    "ProblemSpec",
    "parse_spec",
    "load_spec",
    "emit_spec",
    "spec_hash",
]


class SpecError(ValueError):
    """Invalid spec; names the offending field and its line."""

    def __init__(self, field_path: str, message: str, line: Optional[int] = None):
        where = f"line {line}: " if line else ""
        super().__init__(f"{where}{field_path}: {message}")
        self.field = field_path
        self.line = line


class SpecWarning(UserWarning):
    pass


@dataclass(frozen=True)
class ChannelSpec:
    kind: str
    param: object  # float for bsc/z, tuple of row tuples for matrix
    name: str = ""

    def build(self) -> Dmc:
        if self.kind == "bsc":
            ch = make_bsc(self.param)
        elif self.kind == "z":
            ch = make_z(self.param)
        else:
            ch = Dmc(np.array(self.param, dtype=float))
        return Dmc(ch.rows, name=self.name or ch.name)


@dataclass(frozen=True)
class ConstraintSpec:
    kind: str  # scalar | vector | grid
    values: tuple  # (B,), (B_1..B_L) or (start, stop, steps)

    def points(self, L: int) -> list:
        """One constraint vector per run point."""
        if self.kind == "scalar":
            return [np.full(L, self.values[0])]
        if self.kind == "vector":
            return [np.array(self.values, dtype=float)]
        start, stop, steps = self.values
        return [np.full(L, B) for B in np.linspace(start, stop, int(steps))]

    def scalars(self) -> list:
        if self.kind == "vector":
            raise ValueError("per-receiver constraints have no scalar sweep")
        if self.kind == "scalar":
            return [float(self.values[0])]
        start, stop, steps = self.values
        return [float(B) for B in np.linspace(start, stop, int(steps))]


@dataclass(frozen=True)
class Options:
    K: Optional[int] = None
    objective: str = "capacity"
    sigmas: tuple = ()
    peak: Optional[float] = None
    grid_size: int = 65


@dataclass(frozen=True)
class ProblemSpec:
    task: str
    channels: tuple = ()
    energy: object = "hamming"  # "hamming" or tuple of per-channel tuples
    constraints: ConstraintSpec = ConstraintSpec("scalar", (0.0,))
    options: Options = field(default_factory=Options)
    name: str = ""

    def build_channels(self) -> tuple:
        return tuple(c.build() for c in self.channels)

    def build_energies(self) -> tuple:
        chans = self.build_channels()
        if self.energy == "hamming":
            return tuple(hamming_energy(ch.output_size) for ch in chans)
        return tuple(EnergyFunctional(np.array(v, dtype=float)) for v in self.energy)

    def problem(self, B=None) -> MulticastProblem:
        chans = self.build_channels()
        if B is None:
            B = self.constraints.points(len(chans))[0]
        return MulticastProblem(chans, self.build_energies(), np.broadcast_to(np.asarray(B, dtype=float), (len(chans),)).copy())

    def gaussian(self, B: float) -> GaussianMulticast:
        return GaussianMulticast(tuple(self.options.sigmas), float(self.options.peak), float(B))


# --- line lookup -------------------------------------------------------------


def _node_at(node, path):
    for key in path:
        if isinstance(node, yaml.MappingNode):
            nxt = None
            for k, v in node.value:
                if k.value == key:
                    nxt = v
                    break
            if nxt is None:
                return node
            node = nxt
        elif isinstance(node, yaml.SequenceNode) and isinstance(key, int) and key < len(node.value):
            node = node.value[key]
        else:
            return node
    return node


class _Ctx:
    def __init__(self, root):
        self.root = root

    def fail(self, path, message):
        node = _node_at(self.root, path) if self.root is not None else None
        line = node.start_mark.line + 1 if node is not None else None
        raise SpecError(_fmt(path), message, line)


def _fmt(path):
    out = ""
    for p in path:
        out += f"[{p}]" if isinstance(p, int) else (f".{p}" if out else p)
    return out or "<root>"


def _num(ctx, path, v, *, integer=False):
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        ctx.fail(path, f"expected a number, got {v!r}")
    if not np.isfinite(v):
        ctx.fail(path, "must be finite")
    if integer:
        if float(v) != int(v):
            ctx.fail(path, f"expected an integer, got {v!r}")
        return int(v)
    return float(v)


def _keys(ctx, path, d, allowed, required=()):
    if not isinstance(d, dict):
        ctx.fail(path, f"expected a mapping, got {type(d).__name__}")
    for k in d:
        if k not in allowed:
            ctx.fail(path + [k], f"unknown field (allowed: {', '.join(allowed)})")
    for k in required:
        if k not in d:
            ctx.fail(path, f"missing required field '{k}'")


def _channel(ctx, i, c):
    path = ["channels", i]
    _keys(ctx, path, c, ("kind", "name") + tuple(p for ps in _KINDS.values() for p in ps), ("kind",))
    kind = c["kind"]
    if kind not in _KINDS:
        ctx.fail(path + ["kind"], f"unknown kind {kind!r} (expected bsc, z or matrix)")
    for k in c:
        if k not in ("kind", "name") + _KINDS[kind]:
            ctx.fail(path + [k], f"not a parameter of kind {kind!r}")
    (pname,) = _KINDS[kind]
    if pname not in c:
        ctx.fail(path, f"kind {kind!r} needs '{pname}'")
    name = str(c.get("name", ""))
    if kind in ("bsc", "z"):
        p = _num(ctx, path + [pname], c[pname])
        if not 0 <= p <= 1:
            ctx.fail(path + [pname], f"probability {p} outside [0, 1]")
        return ChannelSpec(kind, p, name)
    rows = c["rows"]
    if not isinstance(rows, list) or not rows or not all(isinstance(r, list) and r for r in rows):
        ctx.fail(path + ["rows"], "expected a non-empty list of non-empty rows")
    width = len(rows[0])
    out = []
    for r, row in enumerate(rows):
        rp = path + ["rows", r]
        if len(row) != width:
            ctx.fail(rp, f"row has {len(row)} entries, expected {width}")
        vals = [_num(ctx, rp + [j], v) for j, v in enumerate(row)]
        if min(vals) < 0 or max(vals) > 1:
            ctx.fail(rp, "entries must lie in [0, 1]")
        if abs(sum(vals) - 1.0) > 1e-12:
            ctx.fail(rp, f"row {r} sums to {sum(vals):.12g}, not 1")
        out.append(tuple(vals))
    return ChannelSpec(kind, tuple(out), name)


def _constraints(ctx, raw):
    path = ["constraints"]
    if isinstance(raw, dict):
        _keys(ctx, path, raw, _GRID, _GRID)
        start = _num(ctx, path + ["start"], raw["start"])
        stop = _num(ctx, path + ["stop"], raw["stop"])
        steps = _num(ctx, path + ["steps"], raw["steps"], integer=True)
        if steps < 1:
            ctx.fail(path + ["steps"], "need at least one point")
        if steps > 1 and stop <= start:
            ctx.fail(path + ["stop"], "stop must exceed start")
        if start < 0:
            ctx.fail(path + ["start"], "energy constraints must be nonnegative")
        return ConstraintSpec("grid", (start, stop, steps))
    if isinstance(raw, list):
        if not raw:
            ctx.fail(path, "empty constraint vector")
        vals = tuple(_num(ctx, path + [i], v) for i, v in enumerate(raw))
        if min(vals) < 0:
            ctx.fail(path, "energy constraints must be nonnegative")
        return ConstraintSpec("vector", vals)
    B = _num(ctx, path, raw)
    if B < 0:
        ctx.fail(path, "energy constraints must be nonnegative")
    return ConstraintSpec("scalar", (B,))


def _options(ctx, raw, task):
    path = ["options"]
    if raw is None:
        raw = {}
    _keys(ctx, path, raw, _OPTIONS)
    K = None
    if "K" in raw:
        K = _num(ctx, path + ["K"], raw["K"], integer=True)
        if K < 1:
            ctx.fail(path + ["K"], "K must be positive")
    objective = raw.get("objective", "capacity")
    if objective not in OBJECTIVES:
        ctx.fail(path + ["objective"], f"unknown objective {objective!r}")
    sigmas = ()
    if "sigmas" in raw:
        if not isinstance(raw["sigmas"], list) or not raw["sigmas"]:
            ctx.fail(path + ["sigmas"], "expected a non-empty list")
        sigmas = tuple(_num(ctx, path + ["sigmas", i], s) for i, s in enumerate(raw["sigmas"]))
        if min(sigmas) <= 0:
            ctx.fail(path + ["sigmas"], "noise deviations must be positive")
    peak = None
    if "peak" in raw:
        peak = _num(ctx, path + ["peak"], raw["peak"])
        if peak <= 0:
            ctx.fail(path + ["peak"], "peak amplitude must be positive")
    grid_size = _num(ctx, path + ["grid_size"], raw.get("grid_size", 65), integer=True)
    if grid_size < 3:
        ctx.fail(path + ["grid_size"], "grid_size must be at least 3")
    if task == "gaussian" and (not sigmas or peak is None):
        ctx.fail(path, "gaussian task needs 'sigmas' and 'peak'")
    if task == "segment" and K is None:
        ctx.fail(path, "segment task needs 'K'")
    return Options(K, objective, sigmas, peak, grid_size)


def _from_data(data, root=None) -> ProblemSpec:
    ctx = _Ctx(root)
    _keys(ctx, [], data, _TOP, ("task",))
    task = data["task"]
    if task not in TASKS:
        ctx.fail(["task"], f"unknown task {task!r} (expected one of {', '.join(TASKS)})")
    options = _options(ctx, data.get("options"), task)
    constraints = _constraints(ctx, data.get("constraints", 0.0))
    name = str(data.get("name", ""))

    if task == "gaussian":
        for k in ("channels", "energy"):
            if k in data:
                ctx.fail([k], "not used by the gaussian task")
        if constraints.kind == "vector":
            ctx.fail(["constraints"], "gaussian receivers share one constraint")
        spec = ProblemSpec(task, (), "hamming", constraints, options, name)
        bmax = min(options.sigmas) ** 2 + options.peak ** 2
        if max(constraints.scalars()) > bmax + 1e-12:
            warnings.warn(f"constraints exceed P^2 + sigma_min^2 = {bmax:.12g}", SpecWarning, stacklevel=3)
        return spec

    raw = data.get("channels")
    if not isinstance(raw, list) or not raw:
        ctx.fail(["channels"], "need a non-empty list of channels")
    channels = tuple(_channel(ctx, i, c) for i, c in enumerate(raw))
    built = [c.build() for c in channels]
    sizes = {ch.input_size for ch in built}
    if len(sizes) > 1:
        ctx.fail(["channels"], f"channels disagree on input alphabet size: {sorted(sizes)}")
    L = len(channels)

    energy = data.get("energy", "hamming")
    if energy != "hamming":
        if not isinstance(energy, list) or len(energy) != L:
            ctx.fail(["energy"], f"expected 'hamming' or {L} energy vectors")
        vecs = []
        for i, v in enumerate(energy):
            if not isinstance(v, list) or len(v) != built[i].output_size:
                ctx.fail(["energy", i], f"expected {built[i].output_size} values for channel {i + 1}")
            vals = tuple(_num(ctx, ["energy", i, j], x) for j, x in enumerate(v))
            if min(vals) < 0:
                ctx.fail(["energy", i], "energy values must be nonnegative")
            vecs.append(vals)
        energy = tuple(vecs)

    if constraints.kind == "vector" and len(constraints.values) != L:
        ctx.fail(["constraints"], f"expected {L} per-receiver values, got {len(constraints.values)}")
    if task == "pp" and L != 1:
        ctx.fail(["channels"], "pp task takes exactly one channel")
    if task == "segment" and not options.K <= L:
        ctx.fail(["options", "K"], f"K={options.K} exceeds the {L} receivers")
    spec = ProblemSpec(task, channels, energy, constraints, options, name)

    from .multicast import domain_feasible

    for B in constraints.points(L):
        if not domain_feasible(spec.problem(B)):
            warnings.warn(f"constraints {B.tolist()} are not jointly achievable", SpecWarning, stacklevel=3)
            break
    return spec


def parse_spec(text: str) -> ProblemSpec:
    """Parse and validate spec text; raises :class:`SpecError` naming field and line."""
    try:
        root = yaml.compose(text, Loader=yaml.SafeLoader)
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        raise SpecError("<syntax>", str(getattr(exc, "problem", exc)), mark.line + 1 if mark else None) from None
    if data is None:
        raise SpecError("<root>", "empty spec")
    return _from_data(data, root)


def load_spec(path) -> ProblemSpec:
    with open(path, encoding="utf-8") as fh:
        return parse_spec(fh.read())


def _to_data(spec: ProblemSpec) -> dict:
    out = {"task": spec.task}
    if spec.name:
        out["name"] = spec.name
    if spec.task != "gaussian":
        chans = []
        for c in spec.channels:
            d = {"kind": c.kind, _KINDS[c.kind][0]: [list(r) for r in c.param] if c.kind == "matrix" else c.param}
            if c.name:
                d["name"] = c.name
            chans.append(d)
        out["channels"] = chans
        out["energy"] = spec.energy if spec.energy == "hamming" else [list(v) for v in spec.energy]
    cs = spec.constraints
    if cs.kind == "scalar":
        out["constraints"] = cs.values[0]
    elif cs.kind == "vector":
        out["constraints"] = list(cs.values)
    else:
        out["constraints"] = dict(zip(_GRID, cs.values))
    o = spec.options
    opts = {}
    if o.K is not None:
        opts["K"] = o.K
    if o.objective != "capacity":
        opts["objective"] = o.objective
    if o.sigmas:
        opts["sigmas"] = list(o.sigmas)
    if o.peak is not None:
        opts["peak"] = o.peak
    if o.grid_size != 65:
        opts["grid_size"] = o.grid_size
    if opts:
        out["options"] = opts
    return out


def emit_spec(spec: ProblemSpec) -> str:
    """Canonical YAML text; ``parse_spec(emit_spec(s)) == s``."""
    return yaml.safe_dump(_to_data(spec), sort_keys=False, default_flow_style=None)


def spec_hash(spec: ProblemSpec) -> str:
    return hashlib.sha256(emit_spec(spec).encode("utf-8")).hexdigest()
