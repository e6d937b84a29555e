"""Declarative transform pipelines: config validation, execution and reports.

A config is a JSON document::

    {
      "grid": {"lower": [0, 0], "upper": [1, 1], "shape": [129, 129]},
      "sigma": "exp(-2*x1)",
      "solutions": {"a": "exp((1+sqrt(2))*x1)*cos(x2)"},
      "streams": {},
      "steps": [{"kind": "moutard2d", "variant": "I", "seed": {"solution": "a"}}],
      "verify": ["hcm1", "hcm1bis"],
      "output": "out"
    }

``grid`` may instead give ``origin``/``spacing``/``shape`` (``dim`` is
optional and checked).  Field specs are expression strings, numbers,
``{"expr": ...}`` or ``{"file": path}``; ``sigma`` additionally accepts
``{"example2": {...}}`` and ``{"example3": {...}}`` generators, which also
add a solution of the same name.  Relative paths resolve against the config
file's directory.

Solutions and streams are carried as named pairs (u, v): u solves
div(sigma grad u) = 0 and v solves div(sigma^-1 grad v) = 0.  Every
transform step maps every pair.  Step kinds and their keys:

    moutard2d          variant (R|I), seed, omega_mode, constant, sign, recover
    recover_u_v        (recover the psi~ left pending by moutard2d)
    stream_function    (attach v to every pair lacking one)
    theorem3           w
    generalized        Q1, Q2, w
    schrodinger_reduce (Q and psi = sqrt(sigma) u)

A seed is a field spec or ``{"solution": name}`` / ``{"stream": name}``.
Verify entries are equation tags, optionally restricted to one pair as
``"tag:name"``.
"""
from __future__ import annotations

import hashlib
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .conductivity import Conductivity, as_field
from .conductivity2d import (
    Moutard2D,
    TransformPlan2D,
    ConductivitySolution,
    example2_solution,
    example3_solution,
    special_fplus,
    stream_function,
    theorem1_recover,
    u_to_psi,
)
from .conductivity_nd import NdTransform, generalized_transform, schrodinger_Q
from .errors import MoutardError, PreconditionError
from .expr import Expression, ExpressionError
from .field import Field, Grid, read_field, wirtinger_dz, write_field
from .gaf import GafCoefficient, sigma_to_q
from .verify import BOUNDARY_BAND, EQUATIONS, residual

__all__ = [
    "ConfigError",
    "PipelineConfig",
    "RunResult",
    "STEP_KINDS",
    "DEFAULT_MAX_DEPTH",
    "verification_band",
    "load_config",
    "run_pipeline",
    "check_outputs",
]

DEFAULT_MAX_DEPTH = 4
# every transform beyond the second differentiates a field whose boundary rows
# came from one-sided stencils of an earlier step; widen the band to match
EXTRA_BAND_FROM_DEPTH = 2
TRANSFORM_STEPS = {"moutard2d", "theorem3", "generalized"}
STEP_KINDS = ("moutard2d", "recover_u_v", "stream_function", "theorem3", "generalized", "schrodinger_reduce")
TWO_D_ONLY = {"moutard2d", "recover_u_v", "stream_function"}
_STEP_KEYS = {
    "moutard2d": {"variant", "seed", "omega_mode", "constant", "sign", "recover", "base"},
    "recover_u_v": set(),
    "stream_function": set(),
    "theorem3": {"w"},
    "generalized": {"Q1", "Q2", "w"},
    "schrodinger_reduce": set(),
}
# which pair component (or state entry) each verify tag consumes
_VERIFY_KIND = {
    "hc1": "u", "hcm1": "u", "mdhc2": "u", "harmonic": "u",
    "conj1.3": "v", "hcm1bis": "v",
    "gan1": "psi", "gan3": "psi",
    "gan2": "fplus", "gan4": "fplus",
    "sch2": "schrodinger",
    "ga1": "potential", "ga2": "potential",
    "compat": "compat",
}


class ConfigError(MoutardError, ValueError):
    """The config is malformed or its steps are ill-typed; maps to exit status 2."""


@dataclass
class PipelineConfig:
    grid: Grid
    sigma: object
    solutions: dict
    streams: dict
    steps: list
    verify: list
    output: Path
    root: Path
    singular: bool = False
    base: tuple | None = None
    raw: dict = field(default_factory=dict, repr=False)

    @classmethod
    def from_dict(cls, raw: dict, root=".") -> "PipelineConfig":
        if not isinstance(raw, dict):
            raise ConfigError("config must be a JSON object")
        unknown = set(raw) - {"grid", "sigma", "solutions", "streams", "steps", "verify", "output",
                              "singular", "base", "description"}
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        root = Path(root)
        grid = _parse_grid(raw.get("grid"))
        steps = raw.get("steps", [])
        verify = raw.get("verify", [])
        if not isinstance(steps, list) or not all(isinstance(s, dict) for s in steps):
            raise ConfigError("steps must be a list of objects")
        if not isinstance(verify, list) or not all(isinstance(v, str) for v in verify):
            raise ConfigError("verify must be a list of equation tags")
        base = raw.get("base")
        return cls(
            grid=grid,
            sigma=raw.get("sigma", 1.0),
            solutions=dict(raw.get("solutions", {})),
            streams=dict(raw.get("streams", {})),
            steps=steps,
            verify=verify,
            output=root / raw.get("output", "out"),
            root=root,
            singular=bool(raw.get("singular", False)),
            base=None if base is None else tuple(int(b) for b in base),
            raw=raw,
        )

    def depth(self) -> int:
        return sum(1 for s in self.steps if s.get("kind") in TRANSFORM_STEPS)

    def validate(self, max_depth: int = DEFAULT_MAX_DEPTH):
        """Type-check the steps against the running state without computing anything."""
        d = self.grid.dim
        self._check_spec(self.sigma, "sigma")
        for group in ("solutions", "streams"):
            for name, spec in getattr(self, group).items():
                self._check_spec(spec, f"{group}.{name}")
        pairs = set(self.solutions) | set(self.streams)
        if isinstance(self.sigma, dict) and set(self.sigma) & {"example2", "example3"}:
            if d != 2:
                raise ConfigError("sigma: example generators need a 2D grid")
            pairs |= set(self.sigma) & {"example2", "example3"}
        have_u = set(self.solutions) | (pairs - set(self.streams))
        have_v = set(self.streams)
        pending = False
        potential = schrodinger = False
        depth = 0
        for i, step in enumerate(self.steps):
            kind = step.get("kind")
            where = f"step {i} ({kind})"
            if kind not in STEP_KINDS:
                raise ConfigError(f"{where}: unknown step kind; expected one of {STEP_KINDS}")
            extra = set(step) - _STEP_KEYS[kind] - {"kind"}
            if extra:
                raise ConfigError(f"{where}: unexpected keys {sorted(extra)}")
            if kind in TWO_D_ONLY and d != 2:
                raise ConfigError(f"{where}: requires a 2D grid, got d={d}")
            if potential and kind in TRANSFORM_STEPS | {"schrodinger_reduce", "stream_function"}:
                raise ConfigError(f"{where}: not allowed after a generalized step")
            if pending and kind != "recover_u_v":
                raise ConfigError(f"{where}: psi~ from the previous moutard2d step was never recovered")
            if kind in TRANSFORM_STEPS:
                depth += 1
                if depth > max_depth:
                    raise ConfigError(f"{where}: pipeline depth {depth} exceeds the maximum {max_depth}")
            if kind == "moutard2d":
                if step.get("variant") not in ("R", "I"):
                    raise ConfigError(f"{where}: variant must be 'R' or 'I'")
                if step.get("omega_mode", "nonvanishing") not in ("raw", "nonvanishing"):
                    raise ConfigError(f"{where}: omega_mode must be 'raw' or 'nonvanishing'")
                self._check_seed(step.get("seed"), where, have_u, have_v)
                pending = not step.get("recover", True)
                have_u = have_v = set(pairs)
            elif kind == "recover_u_v":
                if not pending:
                    raise ConfigError(f"{where}: nothing to recover")
                pending = False
            elif kind == "stream_function":
                have_v = set(have_u) | have_v
            elif kind == "theorem3":
                self._check_seed(step.get("w"), where, have_u, set())
                have_v = set()
                schrodinger = False
            elif kind == "generalized":
                for key in ("Q1", "Q2", "w"):
                    if key not in step:
                        raise ConfigError(f"{where}: missing {key}")
                    self._check_seed(step[key], where, have_u, set())
                have_v = set()
                potential = True
            elif kind == "schrodinger_reduce":
                schrodinger = True
        if pending:
            raise ConfigError("last moutard2d step left psi~ unrecovered")
        for tag in self.verify:
            eq, _, name = tag.partition(":")
            if eq not in EQUATIONS:
                raise ConfigError(f"verify: unknown equation id {eq!r}")
            need = _VERIFY_KIND[eq]
            if name and name not in pairs:
                raise ConfigError(f"verify: {tag!r} names an unknown pair")
            if need in ("psi", "fplus", "compat") and d != 2:
                raise ConfigError(f"verify: {eq} requires a 2D grid, got d={d}")
            if need == "v" and not (have_v if not name else name in have_v):
                raise ConfigError(f"verify: {eq} needs a stream function; add a stream_function step")
            if need == "schrodinger" and not schrodinger:
                raise ConfigError(f"verify: {eq} needs a schrodinger_reduce step")
            if need == "potential" and not potential:
                raise ConfigError(f"verify: {eq} needs a generalized step")
        return depth

    def _check_spec(self, spec, where):
        """Parse expressions and locate files without sampling anything."""
        if isinstance(spec, dict) and len(spec) == 1 and set(spec) & {"example2", "example3"}:
            params = next(iter(spec.values()))
            if not isinstance(params, dict):
                raise ConfigError(f"{where}: generator parameters must be an object")
            for key, value in params.items():
                if isinstance(value, str):
                    self._check_spec(value, f"{where}.{key}")
            return
        text = spec.get("expr") if isinstance(spec, dict) and len(spec) == 1 and "expr" in spec else spec
        if isinstance(text, str):
            try:
                expr = Expression(text)
            except ExpressionError as exc:
                raise ConfigError(f"{where}: {exc}") from None
            if expr.max_coord > self.grid.dim:
                raise ConfigError(f"{where}: uses x{expr.max_coord} on a {self.grid.dim}D grid")
        elif isinstance(spec, dict) and len(spec) == 1 and "file" in spec:
            if not (self.root / spec["file"]).is_file():
                raise ConfigError(f"{where}: no field file {spec['file']}")
        elif isinstance(spec, bool) or not isinstance(spec, (int, float)):
            raise ConfigError(f"{where}: bad field spec {spec!r}")

    def _check_seed(self, spec, where, have_u, have_v):
        if isinstance(spec, dict) and ("solution" in spec or "stream" in spec):
            if "solution" in spec and spec["solution"] not in have_u:
                raise ConfigError(f"{where}: unknown solution {spec['solution']!r}")
            if "stream" in spec and spec["stream"] not in have_v:
                raise ConfigError(f"{where}: unknown stream {spec['stream']!r}")
            return
        if spec is None:
            raise ConfigError(f"{where}: missing seed")
        try:
            _field_spec(spec, self.grid, self.root)
        except (ExpressionError, OSError, ValueError) as exc:
            raise ConfigError(f"{where}: {exc}") from None


def _parse_grid(spec) -> Grid:
    if not isinstance(spec, dict):
        raise ConfigError("grid must be an object")
    try:
        if "lower" in spec:
            grid = Grid.box(spec["lower"], spec["upper"], spec["shape"])
        else:
            grid = Grid(spec["origin"], spec["spacing"], spec["shape"])
    except KeyError as exc:
        raise ConfigError(f"grid: missing {exc.args[0]!r}") from None
    except (MoutardError, ValueError, TypeError) as exc:
        raise ConfigError(f"grid: {exc}") from None
    if "dim" in spec and int(spec["dim"]) != grid.dim:
        raise ConfigError(f"grid: dim={spec['dim']} disagrees with shape {grid.shape}")
    return grid


def _field_spec(spec, grid: Grid, root: Path) -> Field:
    if isinstance(spec, bool):
        raise ConfigError(f"bad field spec {spec!r}")
    if isinstance(spec, (int, float)):
        return grid.constant(float(spec))
    if isinstance(spec, str):
        return Expression(spec).on(grid)
    if isinstance(spec, dict) and len(spec) == 1:
        if "expr" in spec:
            return Expression(str(spec["expr"])).on(grid)
        if "file" in spec:
            F = read_field(root / spec["file"])
            if F.grid != grid:
                raise ConfigError(f"field file {spec['file']} lives on a different grid")
            return F
    raise ConfigError(f"bad field spec {spec!r}")


def load_config(path) -> PipelineConfig:
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}") from None
    return PipelineConfig.from_dict(raw, root=path.parent)


# execution

@dataclass
class Pair:
    u: Field | None = None
    v: Field | None = None
    psi: Field | None = None


@dataclass
class State:
    grid: Grid
    sigma: Conductivity
    pairs: dict
    singular: bool
    base: tuple | None
    q_tilde: object = None
    potential: Field | None = None
    Q: Field | None = None
    schrodinger_psi: dict = field(default_factory=dict)


@dataclass
class RunResult:
    status: int
    reports: list
    messages: list
    output: Path

    @property
    def passed(self) -> bool:
        return self.status == 0


class _Writer:
    def __init__(self, out: Path):
        self.out = out
        self.files: list[Path] = []

    def field(self, F: Field, *parts: str):
        path = self.out.joinpath(*parts)
        path.parent.mkdir(parents=True, exist_ok=True)
        write_field(F, path)
        self.files.append(path)

    def json(self, obj, *parts: str):
        path = self.out.joinpath(*parts)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")
        self.files.append(path)


def _initial_state(cfg: PipelineConfig) -> State:
    grid, root = cfg.grid, cfg.root
    pairs: dict[str, Pair] = {}
    spec = cfg.sigma
    if isinstance(spec, dict) and ("example2" in spec or "example3" in spec):
        name = "example2" if "example2" in spec else "example3"
        params = dict(spec[name])
        get = lambda k, default=None: _field_spec(params.get(k, default), grid, root)
        if name == "example2":
            sol = example2_solution(get("w"), get("phi"), cfg.base, float(params.get("c", 0.0)),
                                    singular=cfg.singular)
        else:
            sol = example3_solution(get("w"), get("phi1"), float(params.get("c1", 0.0)), get("phi"),
                                    float(params.get("c", 0.0)), cfg.base, singular=cfg.singular)
        sigma = sol.sigma
        pairs[name] = Pair(u=sol.u)
    else:
        sigma = Conductivity(_field_spec(spec, grid, root), singular=cfg.singular)
    for name, s in cfg.solutions.items():
        pairs.setdefault(name, Pair()).u = _field_spec(s, grid, root)
    for name, s in cfg.streams.items():
        pairs.setdefault(name, Pair()).v = _field_spec(s, grid, root)
    return State(grid, sigma, pairs, cfg.singular, cfg.base)


def _seed(state: State, spec, root: Path) -> Field:
    if isinstance(spec, dict) and "solution" in spec:
        return state.pairs[spec["solution"]].u
    if isinstance(spec, dict) and "stream" in spec:
        return state.pairs[spec["stream"]].v
    return _field_spec(spec, state.grid, root)


def _gaf_input(state: State, pair: Pair) -> Field:
    if pair.u is not None:
        return u_to_psi(pair.u, state.sigma)
    return 1j * wirtinger_dz(pair.v) / state.sigma.sqrt()


def _step_moutard2d(state, step, writer, tag, root, tolerance_scale):
    variant = step["variant"]
    seed = _seed(state, step["seed"], root)
    eq = "hc1" if variant == "I" else "conj1.3"
    rep = residual(eq, sigma=state.sigma.sigma, **{"u" if variant == "I" else "v": seed},
                   tolerance_scale=tolerance_scale)
    if not rep.passed:
        raise PreconditionError(f"seed fails {eq}: {rep.norm_max:.3e} > {rep.tolerance:.3e}")
    constant = step.get("constant")
    plan = TransformPlan2D(variant, seed, step.get("omega_mode", "nonvanishing"),
                           tuple(step["base"]) if "base" in step else state.base,
                           None if constant is None else 1j * float(constant),
                           int(step.get("sign", 1)), state.singular)
    t = Moutard2D(state.sigma, plan)
    writer.field(t.q.q, tag, "q.txt")
    writer.field(t.f, tag, "f.txt")
    writer.field(t.omega.omega, tag, "omega.txt")
    writer.field(t.q_tilde.q, tag, "q_tilde.txt")
    writer.field(t.sigma_tilde.sigma, tag, "sigma.txt")
    for name, pair in state.pairs.items():
        pair.psi = t.transform_psi(_gaf_input(state, pair), state.base)
        pair.u = pair.v = None
        writer.field(pair.psi, tag, f"psi_{name}.txt")
    state.sigma = t.sigma_tilde
    state.q_tilde = t.q_tilde
    if step.get("recover", True):
        _step_recover(state, step, writer, tag, root, tolerance_scale)


def _step_recover(state, step, writer, tag, root, tolerance_scale):
    for name, pair in state.pairs.items():
        pair.u, pair.v = theorem1_recover(state.sigma, pair.psi, state.base)
        writer.field(pair.u, tag, f"u_{name}.txt")
        writer.field(pair.v, tag, f"v_{name}.txt")


def _step_stream(state, step, writer, tag, root, tolerance_scale):
    for name, pair in state.pairs.items():
        if pair.v is None:
            pair.v = stream_function(ConductivitySolution(state.sigma, pair.u), state.base)
            writer.field(pair.v, tag, f"v_{name}.txt")


def _step_theorem3(state, step, writer, tag, root, tolerance_scale):
    w = _seed(state, step["w"], root)
    t = NdTransform(w, state.sigma, singular=state.singular, tolerance_scale=tolerance_scale)
    writer.field(w, tag, "w.txt")
    for name, pair in state.pairs.items():
        _, pair.u = t.apply(pair.u)
        pair.v = pair.psi = None
        writer.field(pair.u, tag, f"u_{name}.txt")
    state.sigma = t.apply_sigma()
    state.q_tilde = None
    state.Q = None
    writer.field(state.sigma.sigma, tag, "sigma.txt")


def _step_generalized(state, step, writer, tag, root, tolerance_scale):
    Q1 = _seed(state, step["Q1"], root)
    Q2 = _seed(state, step["Q2"], root)
    w = _seed(state, step["w"], root)
    rep = residual("ga1", sigma=state.sigma.sigma, u=w, q=Q2, tolerance_scale=tolerance_scale)
    if not rep.passed:
        raise PreconditionError(f"w fails ga1 with Q2: {rep.norm_max:.3e} > {rep.tolerance:.3e}")
    sigma_tilde = q = None
    for name, pair in state.pairs.items():
        sigma_tilde, pair.u, q = generalized_transform(state.sigma, Q1, Q2, w, pair.u, check=False,
                                                       singular=state.singular)
        pair.v = pair.psi = None
        writer.field(pair.u, tag, f"u_{name}.txt")
    if sigma_tilde is None:
        sigma_tilde, _, q = generalized_transform(state.sigma, Q1, Q2, w, w, check=False,
                                                  singular=state.singular)
    state.sigma, state.potential, state.q_tilde = sigma_tilde, q, None
    writer.field(w, tag, "w.txt")
    writer.field(q, tag, "q.txt")
    writer.field(state.sigma.sigma, tag, "sigma.txt")


def _step_schrodinger(state, step, writer, tag, root, tolerance_scale):
    data = schrodinger_Q(state.sigma)
    state.Q = data.Q
    writer.field(data.Q, tag, "Q.txt")
    state.schrodinger_psi = {}
    for name, pair in state.pairs.items():
        if pair.u is not None:
            state.schrodinger_psi[name] = data.to_schrodinger(pair.u)
            writer.field(state.schrodinger_psi[name], tag, f"psi_{name}.txt")


_STEPS = {
    "moutard2d": _step_moutard2d,
    "recover_u_v": _step_recover,
    "stream_function": _step_stream,
    "theorem3": _step_theorem3,
    "generalized": _step_generalized,
    "schrodinger_reduce": _step_schrodinger,
}


def _verification_jobs(state: State, tags: list) -> list:
    """Expand verify tags into (label, equation_id, inputs) triples."""
    jobs = []
    s = state.sigma.sigma
    for tag in tags:
        eq, _, only = tag.partition(":")
        kind = _VERIFY_KIND[eq]
        names = [only] if only else list(state.pairs)
        if kind == "compat":
            q = state.q_tilde.q if state.q_tilde is not None else sigma_to_q(state.sigma).q
            jobs.append((eq, eq, {"q": q}))
            continue
        if kind == "fplus":
            q = sigma_to_q(state.sigma).q
            for variant in ("R", "I"):
                jobs.append((f"{eq}:f+_{variant}", eq, {"psi_plus": special_fplus(state.sigma, variant), "q": q}))
            continue
        for name in names:
            pair = state.pairs[name]
            label = f"{eq}:{name}"
            if kind == "u" and pair.u is not None:
                inputs = {"u": pair.u} if eq == "harmonic" else {"sigma": s, "u": pair.u}
            elif kind == "v" and pair.v is not None:
                inputs = {"sigma": s, "v": pair.v}
            elif kind == "psi" and (pair.u is not None or pair.v is not None):
                inputs = {"psi": _gaf_input(state, pair), "q": sigma_to_q(state.sigma).q}
            elif kind == "schrodinger" and name in state.schrodinger_psi:
                inputs = {"psi": state.schrodinger_psi[name], "Q": state.Q}
            elif kind == "potential" and pair.u is not None:
                inputs = {"sigma": s, "u": pair.u, "q": state.potential}
            else:
                continue
            jobs.append((label, eq, inputs))
    return jobs


def verification_band(depth: int) -> int:
    """Boundary band used to verify the output of a chain of ``depth`` transforms."""
    return BOUNDARY_BAND + max(0, depth - EXTRA_BAND_FROM_DEPTH)


def _run_jobs(jobs, tolerance_scale, n_jobs, band=BOUNDARY_BAND):
    def one(job):
        label, eq, inputs = job
        return label, residual(eq, tolerance_scale=tolerance_scale, band=band, **inputs)

    if n_jobs > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            return list(pool.map(one, jobs))
    return [one(j) for j in jobs]


def _emit_reports(results, writer: _Writer, out: Path):
    entries = []
    for label, rep in results:
        name = label.replace(":", "__").replace("+", "p")
        writer.json(rep.to_dict(), "reports", f"{name}.json")
        entries.append({"label": label, "file": f"reports/{name}.json", **rep.to_dict()})
    summary = {"reports": entries, "all_pass": all(r.passed for _, r in results)}
    writer.json(summary, "report.json")
    return summary


def _write_final(state: State, writer: _Writer):
    writer.field(state.sigma.sigma, "final", "sigma.txt")
    for name, pair in state.pairs.items():
        for comp in ("u", "v"):
            F = getattr(pair, comp)
            if F is not None:
                writer.field(F, "final", f"{comp}_{name}.txt")
    if state.q_tilde is not None:
        writer.field(state.q_tilde.q, "final", "q_tilde.txt")
    if state.potential is not None:
        writer.field(state.potential, "final", "potential.txt")
    if state.Q is not None:
        writer.field(state.Q, "final", "Q.txt")
        for name, psi in state.schrodinger_psi.items():
            writer.field(psi, "final", f"schrodinger_psi_{name}.txt")


def _write_manifest(writer: _Writer, out: Path, extra: dict):
    files = {}
    for path in sorted(set(writer.files)):
        files[path.relative_to(out).as_posix()] = hashlib.sha256(path.read_bytes()).hexdigest()
    manifest = dict(extra)
    manifest["files"] = files
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def run_pipeline(cfg: PipelineConfig, *, tolerance_scale: float = 1.0, singular: bool | None = None,
                 max_depth: int = DEFAULT_MAX_DEPTH, jobs: int = 1) -> RunResult:
    """Validate and execute ``cfg``; write fields, reports and a manifest under ``cfg.output``.

    Returns status 0 when every verification passes, 1 when one fails or a
    transform precondition breaks at run time, 2 when the config is invalid.
    """
    if singular is not None:
        cfg.singular = singular
    out = cfg.output
    try:
        depth = cfg.validate(max_depth)
    except ConfigError as exc:
        return RunResult(2, [], [str(exc)], out)
    out.mkdir(parents=True, exist_ok=True)
    writer = _Writer(out)
    messages = []
    try:
        state = _initial_state(cfg)
    except ConfigError as exc:
        return RunResult(2, [], [str(exc)], out)
    except MoutardError as exc:
        return RunResult(1, [], [f"initial state: {exc}"], out)
    writer.field(state.sigma.sigma, "step00_init", "sigma.txt")
    for name, pair in state.pairs.items():
        for comp in ("u", "v"):
            F = getattr(pair, comp)
            if F is not None:
                writer.field(F, "step00_init", f"{comp}_{name}.txt")
    for i, step in enumerate(cfg.steps, start=1):
        tag = f"step{i:02d}_{step['kind']}"
        try:
            _STEPS[step["kind"]](state, step, writer, tag, cfg.root, tolerance_scale)
        except MoutardError as exc:
            messages.append(f"step {i - 1} ({step['kind']}): {exc}")
            _write_manifest(writer, out, {"status": 1, "messages": messages})
            return RunResult(1, [], messages, out)
    _write_final(state, writer)
    results = _run_jobs(_verification_jobs(state, cfg.verify), tolerance_scale, jobs, verification_band(depth))
    summary = _emit_reports(results, writer, out)
    status = 0 if summary["all_pass"] else 1
    for label, rep in results:
        if not rep.passed:
            messages.append(f"{label} failed: see reports/{label.replace(':', '__').replace('+', 'p')}.json")
    _write_manifest(writer, out, {"status": status, "depth": depth, "messages": messages})
    return RunResult(status, [r for _, r in results], messages, out)


def check_outputs(cfg: PipelineConfig, *, tolerance_scale: float = 1.0, jobs: int = 1,
                  max_depth: int = DEFAULT_MAX_DEPTH) -> RunResult:
    """Re-verify the ``final/`` fields of a previous run without recomputing any step."""
    out = cfg.output
    try:
        depth = cfg.validate(max_depth)
    except ConfigError as exc:
        return RunResult(2, [], [str(exc)], out)
    final = out / "final"
    if not (final / "sigma.txt").exists():
        return RunResult(2, [], [f"no previous outputs under {final}"], out)
    sigma = read_field(final / "sigma.txt")
    state = State(sigma.grid, Conductivity(sigma, singular=True), {}, True, cfg.base)
    for path in sorted(final.glob("[uv]_*.txt")):
        comp, name = path.stem.split("_", 1)
        setattr(state.pairs.setdefault(name, Pair()), comp, read_field(path))
    if (final / "Q.txt").exists():
        state.Q = read_field(final / "Q.txt")
        for path in sorted(final.glob("schrodinger_psi_*.txt")):
            state.schrodinger_psi[path.stem[len("schrodinger_psi_"):]] = read_field(path)
    if (final / "potential.txt").exists():
        state.potential = read_field(final / "potential.txt")
    if (final / "q_tilde.txt").exists():
        state.q_tilde = GafCoefficient(read_field(final / "q_tilde.txt"))
    results = _run_jobs(_verification_jobs(state, cfg.verify), tolerance_scale, jobs, verification_band(depth))
    failed = [label for label, r in results if not r.passed]
    return RunResult(1 if failed else 0, [r for _, r in results], [f"{f} failed" for f in failed], out)
