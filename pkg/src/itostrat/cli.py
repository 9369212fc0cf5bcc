"""Command-line front end: scenario configs, presets and artifact writers.

Usage::

    itostrat classify --preset feller
    itostrat meantime --preset logistic --n 999 --out results/
    itostrat simulate --config my.cfg --paths 2000 --json
    itostrat preset "feller-exit M=100"

Exit status is 0 on success, 2 on invalid input (config, preset or a spec
that fails its hypotheses) and 1 on any other error.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import asdict, dataclass, field, fields, replace

import numpy as np

from .boundary import boundary_report
from .coefficients import (
    DiffusionSpec, Interpretation, format_domain, parse_domain, validate_spec,
)
from .expr import ExprSyntaxError, equivalent, parse_expr, to_string
from .meantime import solve_mean_absorption_time
from .rng import PathStream
from .simulate import (
    Path, bessel_closed_form, ensemble, reflected_solution, shifted_family,
    simulate_ito, simulate_stratonovich, stopped_family, verification_tolerance,
    verify_solution,
)
from .transform import fixed_points, ito_to_stratonovich, stratonovich_to_ito

__all__ = ["ScenarioConfig", "ConfigError", "ValidationFailure", "PRESETS",
           "resolve_preset", "run", "main"]

ANALYSES = ("transform", "classify", "meantime", "simulate", "verify")


class ConfigError(ValueError):
    """Malformed config text; ``line`` and ``offset`` are 1-based when known."""

    def __init__(self, message: str, line: int | None = None, offset: int | None = None):
        self.message, self.line, self.offset = message, line, offset
        where = []
        if line is not None:
            where.append(f"line {line}")
        if offset is not None:
            where.append(f"offset {offset}")
        super().__init__(f"{', '.join(where)}: {message}" if where else message)


class ValidationFailure(ValueError):
    pass


@dataclass(frozen=True)
class ScenarioConfig:
    name: str
    f: str
    g: str
    domain: tuple[float, float]
    interpretation: str = "Ito"
    x0: float = 0.5
    dt: float = 1e-4
    horizon: float = 20.0
    n_paths: int = 10_000
    seed: int = 42
    n: int = 999
    outputs: tuple[str, ...] = ("transform", "classify")

    def __post_init__(self):
        object.__setattr__(self, "interpretation",
                           Interpretation.parse(self.interpretation).value)
        object.__setattr__(self, "domain", tuple(float(v) for v in self.domain))
        object.__setattr__(self, "outputs", tuple(self.outputs))

    def spec(self) -> DiffusionSpec:
        return DiffusionSpec.from_strings(self.f, self.g, self.domain,
                                          self.interpretation, self.name)

    def check(self) -> None:
        """Raise :class:`ConfigError` unless every field is usable."""
        for key in ("f", "g"):
            try:
                parse_expr(getattr(self, key))
            except ExprSyntaxError as err:
                raise ConfigError(f"{key}: {err.message}", offset=err.offset) from None
        for key in ("dt", "horizon"):
            if not getattr(self, key) > 0:
                raise ConfigError(f"{key} must be positive")
        if self.n_paths < 1 or self.n < 3:
            raise ConfigError("n_paths must be >= 1 and n >= 3")
        if self.dt >= self.horizon:
            raise ConfigError("dt must be smaller than horizon")
        a, b = self.domain
        if not a <= self.x0 <= b:
            raise ConfigError(f"x0={self.x0} outside the domain {format_domain(self.domain)}")
        bad = [o for o in self.outputs if o not in ANALYSES]
        if bad:
            raise ConfigError(f"unknown outputs {bad}; choose from {list(ANALYSES)}")

    # text format: one key=value per line, '#' starts a comment

    def to_text(self) -> str:
        d = self.to_dict()
        d["outputs"] = ",".join(self.outputs)
        return "".join(f"{k} = {v}\n" for k, v in d.items())

    @classmethod
    def from_text(cls, text: str) -> "ScenarioConfig":
        raw: dict[str, tuple[str, int, int]] = {}
        names = {fl.name for fl in fields(cls)}
        for lineno, line in enumerate(text.splitlines(), start=1):
            body = line.split("#", 1)[0]
            if not body.strip():
                continue
            if "=" not in body:
                raise ConfigError("expected key = value", lineno, len(body) - len(body.lstrip()) + 1)
            key, value = body.split("=", 1)
            k = key.strip()
            if k not in names:
                raise ConfigError(f"unknown key {k!r}", lineno, body.index(k) + 1)
            if k in raw:
                raise ConfigError(f"duplicate key {k!r}", lineno, body.index(k) + 1)
            col = len(key) + 2 + (len(value) - len(value.lstrip()))
            raw[k] = (value.strip(), lineno, col)
        for k in ("f", "g", "domain"):
            if k not in raw:
                raise ConfigError(f"missing required key {k!r}")
        values = {}
        for k, (v, lineno, col) in raw.items():
            try:
                values[k] = _convert(k, v)
            except ExprSyntaxError as err:
                raise ConfigError(f"{k}: {err.message}", lineno, col + err.offset - 1) from None
            except ValueError as err:
                raise ConfigError(f"{k}: {err}", lineno, col) from None
        values.setdefault("name", "scenario")
        cfg = cls(**values)
        cfg.check()
        return cfg

    def to_dict(self) -> dict:
        d = asdict(self)
        d["domain"] = format_domain(self.domain)
        d["outputs"] = list(self.outputs)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ScenarioConfig":
        d = dict(d)
        d["domain"] = parse_domain(d["domain"]) if isinstance(d["domain"], str) else d["domain"]
        return cls(**d)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_json(cls, text: str) -> "ScenarioConfig":
        return cls.from_dict(json.loads(text))


def _convert(key: str, value: str):
    if key in ("f", "g"):
        parse_expr(value)
        return value
    if key == "domain":
        return parse_domain(value)
    if key == "interpretation":
        return Interpretation.parse(value).value
    if key in ("n_paths", "seed", "n"):
        return int(value)
    if key in ("x0", "dt", "horizon"):
        return float(value)
    if key == "outputs":
        return tuple(o.strip() for o in value.split(",") if o.strip())
    return value


# presets

def _feller_exit(M: float = 10.0) -> ScenarioConfig:
    if not M > 1.0:
        raise ConfigError("feller-exit needs M > 1 (x0 = 1)")
    # coarser dt keeps the O(M) mean exit time affordable
    return ScenarioConfig(f"feller-exit-M{M:g}", "0", "x", (0.0, M), x0=1.0, dt=1e-3,
                          horizon=max(20.0, 10.0 * M), outputs=("meantime", "simulate"))


PRESETS = {
    "feller": lambda: ScenarioConfig("feller", "0", "x", (0.0, math.inf), x0=1.0,
                                     outputs=("transform", "classify", "verify")),
    "feller-strat": lambda: ScenarioConfig("feller-strat", "0", "x", (0.0, math.inf),
                                           "Stratonovich", x0=1.0,
                                           outputs=("transform", "verify")),
    "feller-reflect": lambda: ScenarioConfig("feller-reflect", "1/2", "x", (0.0, math.inf),
                                             x0=1.0, outputs=("transform", "classify")),
    "logistic": lambda: ScenarioConfig("logistic", "0", "x*(1-x)", (0.0, 1.0),
                                       outputs=("transform", "classify", "meantime",
                                                "simulate")),
    "logistic-drift": lambda: ScenarioConfig("logistic-drift", "x - x^2", "x - x^2",
                                             (0.0, 1.0),
                                             outputs=("transform", "classify", "meantime",
                                                      "simulate")),
    "strat-logistic": lambda: ScenarioConfig("strat-logistic", "-1/2 + 2*x - x^2", "x - x^2",
                                             (0.0, 1.0), "Stratonovich",
                                             outputs=("transform",)),
    "feller-exit": _feller_exit,
}


def resolve_preset(text: str) -> ScenarioConfig:
    """``"name"`` or ``"name key=value ..."``; ``feller-exit`` takes ``M=<val>``,
    every preset accepts config keys as overrides."""
    parts = text.split()
    if not parts or parts[0] not in PRESETS:
        raise ConfigError(f"unknown preset {text!r}; available: {', '.join(PRESETS)}")
    name, params = parts[0], {}
    for p in parts[1:]:
        if "=" not in p:
            raise ConfigError(f"preset parameter {p!r} is not key=value")
        k, v = p.split("=", 1)
        params[k.strip()] = v.strip()
    if name == "feller-exit":
        try:
            cfg = _feller_exit(float(params.pop("M", 10.0)))
        except ValueError as err:
            raise ConfigError(str(err)) from None
    elif "M" in params:
        raise ConfigError("M= only applies to feller-exit")
    else:
        cfg = PRESETS[name]()
    if params:
        names = {fl.name for fl in fields(ScenarioConfig)}
        bad = [k for k in params if k not in names]
        if bad:
            raise ConfigError(f"unknown preset parameters {bad}")
        try:
            cfg = replace(cfg, **{k: _convert(k, v) for k, v in params.items()})
        except ValueError as err:
            raise ConfigError(str(err)) from None
    cfg.check()
    return cfg


# analyses: each returns (headers, rows, payload, artifacts)

def _require_ito(s: DiffusionSpec, what: str):
    if s.interpretation is not Interpretation.ITO:
        raise ValidationFailure(f"{what} needs an Ito spec; run 'transform' for the Ito form")


def _require_hypotheses(s: DiffusionSpec):
    report = validate_spec(s)
    if not report.hypotheses_met:
        raise ValidationFailure("hypotheses not met: " + "; ".join(report.failures()))
    return report


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.6g}"
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_fmt(x) for x in v) + "]"
    return str(v)


def do_transform(cfg: ScenarioConfig):
    s = cfg.spec()
    rep = ito_to_stratonovich(s) if s.interpretation is Interpretation.ITO \
        else stratonovich_to_ito(s)
    d = rep.to_dict()
    rows = [
        ("source", str(rep.source)),
        ("target", str(rep.target)),
        ("correction", d["correction"]),
        ("trivial points (source)", _fmt(d["fixed_points_source"])),
        ("trivial points (target)", _fmt(d["fixed_points_target"])),
        ("destroyed", _fmt(d["destroyed"])),
        ("created", _fmt(d["created"])),
    ]
    if rep.degenerate:
        rows.append(("g' = 0 (excluded)", _fmt(d["degenerate"])))
    return ("field", "value"), rows, d, {"json": json.dumps(d, indent=2)}


def do_classify(cfg: ScenarioConfig):
    s = cfg.spec()
    _require_ito(s, "boundary classification")
    _require_hypotheses(s)
    rows, out = [], []
    for e in s.finite_endpoints():
        if not s.is_degenerate(e):
            rows.append((_fmt(e), "non-degenerate", "-", "-", "-"))
            out.append({"endpoint": e, "analytic_class": "NonDegenerate"})
            continue
        r = boundary_report(s, e)
        rows.append((_fmt(e), r.analytic_class.value, r.integral_verdict.value,
                     str(r.agreement).lower(), f"f={r.f_at:.4g} g'={r.gprime_at:.4g}"))
        out.append(r.to_dict())
    return (("endpoint", "class", "integral", "agreement", "coefficients"), rows, out,
            {"json": json.dumps(out, indent=2)})


def do_meantime(cfg: ScenarioConfig):
    s = cfg.spec()
    _require_ito(s, "the mean-time solver")
    if math.isinf(s.b):
        raise ValidationFailure("the mean-time solver needs a bounded domain")
    _require_hypotheses(s)
    sol = solve_mean_absorption_time(s, cfg.n)
    k = int(np.argmax(sol.values))
    rows = [
        ("boundary conditions", ", ".join(f"{k_}={v.value}" for k_, v in
                                           sol.boundary_conditions.items())),
        ("grid points", str(sol.grid.size)),
        (f"T({cfg.x0:g})", f"{float(sol(cfg.x0)):.6f}"),
        ("max T", f"{sol.values[k]:.6f} at x={sol.grid[k]:.4g}"),
        ("residual", f"{sol.residual_norm:.3g}"),
    ]
    payload = sol.to_dict()
    payload["x0"], payload["T_x0"] = cfg.x0, float(sol(cfg.x0))
    return ("field", "value"), rows, payload, {"csv": sol.to_csv(),
                                               "json": json.dumps(payload, indent=2)}


def _single_path(s: DiffusionSpec, cfg: ScenarioConfig, stream) -> Path:
    if s.interpretation is Interpretation.ITO:
        return simulate_ito(s, cfg.x0, cfg.dt, cfg.horizon, stream)
    return simulate_stratonovich(s, cfg.x0, cfg.dt, cfg.horizon, stream)


def do_simulate(cfg: ScenarioConfig):
    s = cfg.spec()
    st = ensemble(s, cfg.x0, cfg.n_paths, cfg.dt, cfg.horizon, cfg.seed)
    path = _single_path(s, cfg, PathStream(cfg.seed, 0))
    rows = [
        ("paths", str(st.n_paths)),
        ("absorbed", f"{st.n_absorbed} ({st.absorption_probability:.4f} "
                     f"+/- {st.absorption_probability_se:.2g})"),
        ("mean absorption time", f"{st.mean_absorption_time:.5g} "
                                 f"+/- {st.mean_absorption_time_se:.2g}"),
        ("by endpoint", ", ".join(f"{e:g}: {c}" for e, c in st.endpoint_counts.items())
         or "-"),
        ("dt / horizon / seed", f"{st.dt:g} / {st.horizon:g} / {st.seed}"),
    ]
    payload = st.to_dict()
    return ("field", "value"), rows, payload, {"json": st.to_json(), "csv": path.to_csv()}


def _is_strat_feller(s: DiffusionSpec) -> bool:
    return (s.interpretation is Interpretation.STRATONOVICH and s.a == 0.0
            and equivalent(s.f, parse_expr("0")) and equivalent(s.g, parse_expr("x")))


def do_verify(cfg: ScenarioConfig):
    s = cfg.spec()
    n = int(round(cfg.horizon / cfg.dt))
    W = PathStream(cfg.seed, 0).brownian(n, cfg.dt)
    t = np.arange(n + 1) * cfg.dt
    tol = verification_tolerance(cfg.dt)
    cands: list[tuple[str, Path]] = []

    other = ito_to_stratonovich(s) if s.interpretation is Interpretation.ITO \
        else stratonovich_to_ito(s)
    pts = sorted(set(fixed_points(s.f, s.g, s.domain))
                 | set(fixed_points(other.target.f, s.g, s.domain)))
    for p in pts:
        cands.append((f"constant {p:g}", Path(t, np.full(n + 1, p), W)))
    if validate_spec(s).g_nonnegative:
        cands.append((f"simulated from {cfg.x0:g}", _single_path(s, cfg, W)))
    if _is_strat_feller(s):
        x0 = cfg.x0
        cands.append(("closed form", bessel_closed_form(x0, W, cfg.dt)))
        for k in (1, 2, 3):
            cands.append((f"stopped at T_{k}", stopped_family(x0, W, cfg.dt, k)))
        for tau in (0.0, 0.5):
            cands.append((f"shifted tau={tau:g} (from 0)", shifted_family(W, cfg.dt, tau)))
        cands.append(("reflected", reflected_solution(x0, W, cfg.dt)))
        for tau in (0.0, 0.5):
            cands.append((f"reflected from 0, start {tau:g}",
                          reflected_solution(0.0, W, cfg.dt, tau)))
    rows, out = [], []
    for label, path in cands:
        r = verify_solution(s, path)
        rows.append((label, f"{r:.3g}", f"{tol:.3g}", "yes" if r <= tol else "no"))
        out.append({"candidate": label, "x0": path.x0, "residual": r, "tolerance": tol,
                    "solution": r <= tol})
    return (("candidate", "residual", "tolerance", "solves"), rows, out,
            {"json": json.dumps(out, indent=2)})


COMMANDS = {"transform": do_transform, "classify": do_classify, "meantime": do_meantime,
            "simulate": do_simulate, "verify": do_verify}


def _print_table(headers, rows, stream):
    cols = list(zip(headers, *rows))
    widths = [max(len(str(c)) for c in col) for col in cols]
    line = "  ".join(h.ljust(w) for h, w in zip(headers, widths))
    print(line, file=stream)
    print("  ".join("-" * w for w in widths), file=stream)
    for r in rows:
        print("  ".join(str(c).ljust(w) for c, w in zip(r, widths)), file=stream)


def run(subcommand: str, config: ScenarioConfig, out: str | None = None,
        as_json: bool = False, stream=None) -> dict:
    """Run one analysis (or every configured one for ``"preset"``).

    Returns ``{analysis: payload}``; artifacts go to ``out`` as
    ``<name>.<analysis>.<ext>``.
    """
    stream = stream or sys.stdout
    todo = config.outputs if subcommand == "preset" else (subcommand,)
    results, artifacts = {}, {}
    for analysis in todo:
        headers, rows, payload, files = COMMANDS[analysis](config)
        results[analysis] = payload
        for ext, text in files.items():
            artifacts[f"{config.name}.{analysis}.{ext}"] = text
        if not as_json:
            print(f"\n== {config.name}: {analysis} ==", file=stream)
            _print_table(headers, rows, stream)
    if as_json:
        print(json.dumps({"config": config.to_dict(), "results": results}, indent=2),
              file=stream)
    if out:
        os.makedirs(out, exist_ok=True)
        with open(os.path.join(out, f"{config.name}.config.json"), "w") as fh:
            fh.write(config.to_json())
        for fname, text in artifacts.items():
            with open(os.path.join(out, fname), "w") as fh:
                fh.write(text)
    return results


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="itostrat", description=__doc__.split("\n")[0])
    p.add_argument("subcommand", choices=list(ANALYSES) + ["preset"])
    p.add_argument("preset_args", nargs="*",
                   help="for 'preset': preset name and key=value parameters")
    p.add_argument("--preset", help="preset name, e.g. 'feller' or 'feller-exit M=100'")
    p.add_argument("--config", help="key=value config file (or .json)")
    p.add_argument("--list", action="store_true", help="list presets and exit")
    p.add_argument("--out", help="directory for CSV/JSON artifacts")
    p.add_argument("--seed", type=int)
    p.add_argument("--dt", type=float)
    p.add_argument("--paths", type=int, dest="n_paths")
    p.add_argument("--horizon", type=float)
    p.add_argument("--n", type=int, help="interior grid points for meantime")
    p.add_argument("--x0", type=float)
    p.add_argument("--json", action="store_true", help="print JSON instead of tables")
    return p


def _load(args) -> ScenarioConfig:
    sources = [args.preset, args.config, " ".join(args.preset_args) or None]
    given = [x for x in sources if x]
    if len(given) != 1:
        raise ConfigError("give exactly one of --preset, --config or a preset name")
    if args.config:
        try:
            with open(args.config) as fh:
                text = fh.read()
        except OSError as err:
            raise ConfigError(f"cannot read config: {err}") from None
        if args.config.endswith(".json"):
            try:
                cfg = ScenarioConfig.from_json(text)
            except (KeyError, TypeError, json.JSONDecodeError) as err:
                raise ConfigError(f"bad JSON config: {err}") from None
            cfg.check()
        else:
            cfg = ScenarioConfig.from_text(text)
    else:
        cfg = resolve_preset(given[0])
    over = {k: getattr(args, k) for k in ("seed", "dt", "n_paths", "horizon", "n", "x0")
            if getattr(args, k) is not None}
    if over:
        cfg = replace(cfg, **over)
        cfg.check()
    return cfg


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.list:
        for name in PRESETS:
            cfg = resolve_preset(name)
            print(f"{name:15s} {cfg.spec()}  outputs={','.join(cfg.outputs)}")
        return 0
    if args.preset_args and args.subcommand != "preset":
        print("error: positional preset names only go with 'preset'", file=sys.stderr)
        return 2
    try:
        cfg = _load(args)
        run(args.subcommand, cfg, args.out, args.json)
    except (ConfigError, ValidationFailure, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except Exception as err:  # noqa: BLE001
        print(f"error: {type(err).__name__}: {err}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
