"""mb-lab: batch front-end for the experiments.

    mb-lab <command> [--config FILE] [--seed S] [--out DIR] [--set key=value]...

Exit status: 0 when every pass criterion of the run holds, 1 on a numerical
failure (the failing criterion is printed), 2 on usage or schema errors.
Column orders of every emitted CSV are listed in docs/formats.md.
"""
import argparse
import csv
from datetime import datetime, timezone
import hashlib
import io
import json
import math
import os
from pathlib import Path
import sys
import tempfile

import numpy as np

from . import __version__
from .dispersion import PhaseParams

OUT_ENV = "MBLAB_OUT"
DEFAULT_ROOT = "mblab-runs"


class UsageError(Exception):
    pass


# schema: key -> (parser, default, help)

def _floats(s):
    return [float(x) for x in str(s).split(",") if x.strip()]


def _ladder(s):
    s = str(s).strip()
    if ".." in s:
        a, b = (int(x) for x in s.split(".."))
        return [2.0 ** k for k in range(a, b + 1)]
    return _floats(s)


def _str(s):
    return str(s).strip()


COMMON = {"seed": (int, 0, "random seed")}

SCHEMA = {
    "lemmas": {
        "lemma": (_str, "all", "lemma name or 'all'"),
        "n_samples": (int, 200, "draws per lemma"),
        "rho": (_str, "", "comma list of rho; empty = default grid"),
        "resolution": (int, 1, "quadrature refinement factor"),
        "radius_factor": (float, 1.0, "truncation radius factor"),
    },
    "resonance": {
        "N": (float, 4096.0, "frequency scale"),
        "betas": (_floats, "-3,0,3", "comma list of beta at alpha = 4"),
        "K": (float, 10.0, "sublevel threshold for beta = 0"),
    },
    "growth": {
        "construction": (_str, "beta-positive", "beta-positive | beta-negative | beta-zero | general-alpha"),
        "alpha": (float, math.nan, "alpha (default 4, or 2 for general-alpha)"),
        "beta": (float, math.nan, "beta (default 3, -3, 0 or 1 by construction)"),
        "s": (_floats, "0", "comma list of s"),
        "t": (float, 0.05, "time"),
        "ladder": (_ladder, "8..16", "exponent range a..b (N = 2^a..2^b) or comma list"),
        "tolerance": (float, 0.1, "slope tolerance"),
    },
    "solve": {
        "L": (float, 64 * math.pi, "box length"),
        "M": (int, 256, "modes"),
        "alpha": (float, 4.0, "v dispersion"),
        "beta": (float, 3.0, "v drift"),
        "beta1": (float, 0.0, "u drift"),
        "dt": (float, 1e-3, "time step"),
        "T": (float, 1.0, "final time"),
        "samples": (int, 11, "diagnostic samples in [0, T]"),
        "k0": (float, 1.0, "carrier wavenumber of u (v uses k0/2)"),
        "width": (float, 3.0, "Gaussian width"),
        "amplitude": (float, 1.0, "u amplitude (v uses 0.8x)"),
    },
    "crosscheck": {
        "L": (float, 64 * math.pi, "box length"),
        "M": (int, 256, "modes"),
        "alpha": (float, 4.0, "v dispersion"),
        "beta": (float, 3.0, "v drift"),
        "dt": (float, 1e-3, "time step"),
        "t": (float, 0.5, "time"),
        "deltas": (_floats, "0.1,0.01,0.001", "delta ladder"),
        "phi_zero": (int, 0, "1 = drop the u datum"),
        "k0": (float, 1.0, "carrier wavenumber"),
        "width": (float, 3.0, "Gaussian width"),
    },
    "report": {
        "runs": (_str, "", "directory holding growth runs (default: output root)"),
    },
}

DEFAULTS_BY_CONSTRUCTION = {
    "beta-positive": (4.0, 3.0), "beta-negative": (4.0, -3.0),
    "beta-zero": (4.0, 0.0), "general-alpha": (2.0, 1.0),
}
THRESHOLDS = {"beta-positive": 0.5, "beta-negative": 0.25, "beta-zero": 0.75, "general-alpha": 0.0}


def read_config(path):
    pairs = []
    for n, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{n}: expected key=value")
        k, v = line.split("=", 1)
        pairs.append((k.strip(), v.strip()))
    return pairs


def build_config(command, pairs):
    schema = {**COMMON, **SCHEMA[command]}
    raw = {k: d for k, (_, d, _) in schema.items()}
    for k, v in pairs:
        if k not in schema:
            raise UsageError(f"unknown key {k!r} for command {command!r}")
        raw[k] = v
    cfg = {}
    for k, (parse, _, _) in schema.items():
        try:
            cfg[k] = parse(raw[k])
        except (TypeError, ValueError) as e:
            raise UsageError(f"bad value for {k!r}: {raw[k]!r} ({e})")
    return cfg, {k: str(raw[k]) for k in schema}


# output

class RunWriter:
    """Single writer for a run directory; records digests for the manifest."""

    def __init__(self, out):
        self.out = Path(out)
        self.out.mkdir(parents=True, exist_ok=True)
        self.files = {}

    def _put(self, name, data: bytes):
        path = self.out / name
        fd, tmp = tempfile.mkstemp(dir=self.out, prefix=".tmp-")
        with os.fdopen(fd, "wb") as f:
            f.write(data)
        os.replace(tmp, path)
        self.files[name] = hashlib.sha256(data).hexdigest()

    def csv(self, name, header, rows):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_fmt(x) for x in r])
        self._put(name, buf.getvalue().encode())

    def json(self, name, obj):
        self._put(name, (json.dumps(obj, indent=2, sort_keys=True, default=_jsonable) + "\n").encode())

    def text(self, name, s):
        self._put(name, s.encode())

    def manifest(self, echo, status, failures, started):
        from .frozen import REGISTRY_VERSION
        m = {
            "config": echo, "tool": "mb-lab", "version": __version__,
            "started": started, "finished": _now(), "status": status,
            "failures": failures, "files": dict(sorted(self.files.items())),
            "registries": {"frozen": REGISTRY_VERSION},
        }
        data = (json.dumps(m, indent=2, sort_keys=True) + "\n").encode()
        fd, tmp = tempfile.mkstemp(dir=self.out, prefix=".tmp-")
        with os.fdopen(fd, "wb") as f:
            f.write(data)
        os.replace(tmp, self.out / "manifest.json")


def _fmt(x):
    if isinstance(x, (bool, np.bool_)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return x


def _jsonable(x):
    if isinstance(x, np.generic):
        return x.item()
    if isinstance(x, np.ndarray):
        return x.tolist()
    raise TypeError(type(x))


def _now():
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


# svg

def svg_loglog(csv_text, xcol, ycol, group=None, ref_slopes=None, title=""):
    """Log-log line chart rendered from CSV text alone (data + reference slope)."""
    rows = list(csv.DictReader(io.StringIO(csv_text)))
    groups = {}
    for r in rows:
        groups.setdefault(r[group] if group else "", []).append((float(r[xcol]), float(r[ycol])))
    pts = [p for g in groups.values() for p in g if p[0] > 0 and p[1] > 0]
    W, H, pad = 480, 320, 48
    if not pts:
        return f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}"></svg>\n'
    lx = [math.log10(p[0]) for p in pts]
    ly = [math.log10(p[1]) for p in pts]
    x0, x1 = min(lx), max(lx) + 1e-12
    y0, y1 = min(ly) - 0.1, max(ly) + 0.1
    X = lambda v: pad + (math.log10(v) - x0) / (x1 - x0) * (W - 2 * pad)
    Y = lambda v: H - pad - (math.log10(v) - y0) / (y1 - y0) * (H - 2 * pad)
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" font-size="11">',
           f'<text x="{W / 2:.1f}" y="16" text-anchor="middle">{title}</text>',
           f'<line x1="{pad}" y1="{H - pad}" x2="{W - pad}" y2="{H - pad}" stroke="black"/>',
           f'<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{H - pad}" stroke="black"/>',
           f'<text x="{W / 2:.1f}" y="{H - 12}" text-anchor="middle">log10 {xcol}</text>',
           f'<text x="14" y="{H / 2:.1f}" transform="rotate(-90 14 {H / 2:.1f})" '
           f'text-anchor="middle">log10 {ycol}</text>']
    colors = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"]
    for i, (name, g) in enumerate(sorted(groups.items())):
        g = sorted(p for p in g if p[0] > 0 and p[1] > 0)
        c = colors[i % len(colors)]
        path = " ".join(f"{X(a):.2f},{Y(b):.2f}" for a, b in g)
        out.append(f'<polyline fill="none" stroke="{c}" points="{path}"/>')
        for a, b in g:
            out.append(f'<circle cx="{X(a):.2f}" cy="{Y(b):.2f}" r="2.5" fill="{c}"/>')
        if ref_slopes and name in ref_slopes and g:
            m = ref_slopes[name]
            (a0, b0), a1 = g[0], g[-1][0]
            b1 = b0 * (a1 / a0) ** m
            out.append(f'<line x1="{X(a0):.2f}" y1="{Y(b0):.2f}" x2="{X(a1):.2f}" y2="{Y(b1):.2f}" '
                       f'stroke="{c}" stroke-dasharray="4 3"/>')
        out.append(f'<text x="{W - pad + 4}" y="{pad + 14 * i}" fill="{c}">{name}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


# commands

def cmd_lemmas(cfg, w):
    from .frozen import C_EMP
    from .oscillatory import LEMMAS, RHO_GRIDS, ratio_scan, report_rows
    lemmas = LEMMAS if cfg["lemma"] == "all" else (cfg["lemma"],)
    if any(l not in LEMMAS for l in lemmas):
        raise UsageError(f"unknown lemma {cfg['lemma']!r}")
    rows, summary, fails = [], [], []
    for lem in lemmas:
        grid = tuple(_floats(cfg["rho"])) if cfg["rho"] else RHO_GRIDS[lem]
        res = ratio_scan(lem, grid, n_samples=cfg["n_samples"], seed=cfg["seed"],
                         resolution=cfg["resolution"], radius_factor=cfg["radius_factor"])
        for r in report_rows(res):
            rows.append([r["lemma"], r["index"], r["rho0"], r.get("rho1", "")]
                        + [r.get(f"sigma{i}", "") for i in range(4)]
                        + [r["integral"], r["bound"], r["ratio"], r["truncation_radius"], r["node_count"]])
        for rho, rep in sorted(res.per_rho.items()):
            c = C_EMP.get((lem, rho))
            ok = c is None or rep.ratio <= c
            summary.append([lem, rho, rep.ratio, "" if c is None else c, ok])
            if not ok:
                fails.append(f"lemma {lem} rho={rho}: ratio {rep.ratio:.6g} > C_emp {c}")
    w.csv("lemmas.csv", ["lemma", "index", "rho0", "rho1", "sigma0", "sigma1", "sigma2", "sigma3",
                         "integral", "bound", "ratio", "truncation_radius", "node_count"], rows)
    w.csv("lemmas_summary.csv", ["lemma", "rho", "max_ratio", "c_emp", "pass"], summary)
    return fails


def cmd_resonance(cfg, w):
    from .resonance import RegionSpec, strip_measure_beta0, trichotomy_scan
    N, K = cfg["N"], cfg["K"]
    rows, fails = [], []
    for beta in cfg["betas"]:
        p = PhaseParams(4.0, beta)
        band = (-4.0, 4.0) if beta > 0 else (-1.0, 1.0)
        r = trichotomy_scan(p, RegionSpec(N, eta2_band=band), [K])
        meas = r.measure_below[K]
        if beta < 0:
            exact = 1 + 3 * (-beta / 3) * N
            ok = exact * (1 - 1e-12) <= r.min_bracket_G <= exact * 1.02
            ref = exact
        elif beta == 0:
            ref = strip_measure_beta0(N, K)
            ok = 0.5 <= meas / ref <= 2.0
        else:
            ref = 0.0
            ok = r.both_factors_small == 0
        rows.append([beta, N, r.min_bracket_G, meas, r.both_factors_small, ref, ok])
        if not ok:
            fails.append(f"resonance beta={beta}")
    w.csv("resonance.csv", ["beta", "N", "min_bracket_G", "measure_below_K", "both_small_cells",
                            "reference", "pass"], rows)
    return fails


def cmd_growth(cfg, w):
    from .picard import ConstructionId, KINDS, crossing_point, growth_fit
    kind = cfg["construction"]
    if kind not in KINDS:
        raise UsageError(f"unknown construction {kind!r}")
    a0, b0 = DEFAULTS_BY_CONSTRUCTION[kind]
    alpha = a0 if math.isnan(cfg["alpha"]) else cfg["alpha"]
    beta = b0 if math.isnan(cfg["beta"]) else cfg["beta"]
    try:
        base = ConstructionId(kind, alpha, beta, 0.0, 256.0)
    except ValueError as e:
        raise UsageError(str(e))
    rows, fits, fails = [], [], []
    for s in cfg["s"]:
        try:
            g = growth_fit(base.with_s(s), cfg["t"], cfg["ladder"], tolerance=cfg["tolerance"])
        except ValueError as e:
            raise UsageError(str(e))
        for N, v in g.ladder:
            rows.append([s, N, v])
        fits.append({"construction": kind, "alpha": alpha, "beta": beta, "s": s, "t": cfg["t"],
                     "slope": g.slope, "intercept": g.intercept, "residual": g.residual,
                     "predicted_exponent": g.predicted_exponent, "secondary_slope": g.secondary_slope,
                     "tolerance": g.tolerance, "pass": bool(g.passed), "ladder": g.ladder})
        if not g.passed:
            fails.append(f"growth {kind} s={s}: slope {g.slope:.4f} vs {g.predicted_exponent:.4f}")
    out = {"fits": fits}
    if len(fits) >= 2:
        out["crossing"] = crossing_point([f["s"] for f in fits], [f["slope"] for f in fits])
    w.csv("growth.csv", ["s", "N", "windowed_norm"], rows)
    w.json("growth_fit.json", out)
    text = (w.out / "growth.csv").read_text()
    refs = {repr(float(f["s"])): f["predicted_exponent"] for f in fits}
    w.text("growth.svg", svg_loglog(text, "N", "windowed_norm", "s", refs, f"{kind} t={cfg['t']}"))
    return fails


def _smooth_state(cfg, grid, with_u=True):
    from .solver import SpectralState, gaussian_bump
    k0, wd = cfg["k0"], cfg["width"]
    a = cfg.get("amplitude", 1.0)
    f = gaussian_bump(k0, wd, a) if with_u else (lambda x: 0 * x)
    return SpectralState.from_functions(grid, f, gaussian_bump(k0 / 2, wd, 0.8 * a))


def cmd_solve(cfg, w):
    from .solver import GridSpec, SolverParams, integrate, relative_drift, snapshot_rows
    try:
        grid = GridSpec(cfg["L"], cfg["M"])
        P = SolverParams(PhaseParams(1.0, cfg["beta1"]), PhaseParams(cfg["alpha"], cfg["beta"]),
                         cfg["dt"], cfg["T"])
        traj, d = integrate(_smooth_state(cfg, grid), P, np.linspace(0, cfg["T"], cfg["samples"]))
    except ValueError as e:
        raise UsageError(str(e))
    w.csv("diagnostics.csv", ["t", "mass_u", "mass_v", "l2_energy", "hamiltonian"], d.rows())
    xs, ks = snapshot_rows(traj[-1])
    w.csv("snapshot_x.csv", ["x", "u", "v"], xs)
    w.csv("snapshot_k.csv", ["xi", "abs_u_hat", "abs_v_hat"], ks)
    checks = {"mass_u": (relative_drift(d.mass_u), 1e-12), "mass_v": (relative_drift(d.mass_v), 1e-12),
              "l2_energy": (relative_drift(d.l2_energy), 1e-6),
              "hamiltonian": (relative_drift(d.hamiltonian), 1e-5)}
    w.json("drift.json", {k: {"drift": v, "limit": lim, "pass": v <= lim} for k, (v, lim) in checks.items()})
    return [f"{k} drift {v:.3g} > {lim}" for k, (v, lim) in checks.items() if not v <= lim]


def cmd_crosscheck(cfg, w):
    from .solver import GridSpec, SolverParams, picard_crosscheck
    try:
        grid = GridSpec(cfg["L"], cfg["M"])
        P = SolverParams(PhaseParams(1.0, 0.0), PhaseParams(cfg["alpha"], cfg["beta"]), cfg["dt"], cfg["t"])
        r = picard_crosscheck(_smooth_state(cfg, grid, not cfg["phi_zero"]), P, tuple(cfg["deltas"]))
    except ValueError as e:
        raise UsageError(str(e))
    w.csv("crosscheck.csv", ["delta", "residual_u", "residual_v"],
          zip(r.deltas, r.residual_u, r.residual_v))
    w.json("crosscheck.json", {"slope_u": r.slope_u, "slope_v": r.slope_v, "psi2_max": r.psi2_max,
                               "expected": r.expected, "tolerance": r.tolerance, "pass": bool(r.passed)})
    fails = []
    if cfg["phi_zero"]:
        # u is sourced only at second order; the v slope and psi2 = 0 are the checks
        if not (abs(r.slope_v - 3) <= 0.3 and r.psi2_max <= 1e-12):
            fails.append(f"crosscheck phi=0: slope_v {r.slope_v:.3f}, max|psi2| {r.psi2_max:.3g}")
    elif not r.passed:
        fails.append(f"crosscheck slopes u={r.slope_u:.3f} v={r.slope_v:.3f}")
    return fails


def cmd_report(cfg, w, root):
    from .picard import crossing_point
    runs = Path(cfg["runs"]) if cfg["runs"] else root
    groups = {}
    for f in sorted(runs.rglob("growth_fit.json")):
        for fit in json.loads(f.read_text())["fits"]:
            key = (fit["construction"], fit["alpha"], fit["beta"], fit["t"])
            groups.setdefault(key, {})[fit["s"]] = fit["slope"]
    rows, fails = [], []
    for (kind, a, b, t), d in sorted(groups.items()):
        ss = sorted(d)
        cross = crossing_point(ss, [d[s] for s in ss]) if len(ss) >= 2 else math.nan
        exp = THRESHOLDS[kind]
        ok = len(ss) >= 2 and abs(cross - exp) <= 0.05
        rows.append([kind, a, b, t, ";".join(repr(s) for s in ss), ";".join(repr(d[s]) for s in ss),
                     cross, exp, ok])
        if len(ss) < 2:
            fails.append(f"threshold {kind} alpha={a} beta={b}: needs slopes at two or more s values")
        elif not ok:
            fails.append(f"threshold {kind} alpha={a} beta={b}: crossing {cross:.4f} vs {exp}")
    w.csv("thresholds.csv", ["construction", "alpha", "beta", "t", "s_values", "slopes",
                             "measured_s_star", "expected_s_star", "pass"], rows)
    return fails


COMMANDS = {"lemmas": cmd_lemmas, "resonance": cmd_resonance, "growth": cmd_growth,
            "solve": cmd_solve, "crosscheck": cmd_crosscheck, "report": cmd_report}


def parser():
    ap = argparse.ArgumentParser(prog="mb-lab", description=__doc__.split("\n")[0])
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("--config", help="key=value file")
    ap.add_argument("--seed", type=int)
    ap.add_argument("--out", help=f"run directory (default ${OUT_ENV} or ./{DEFAULT_ROOT}, then <command>-<config digest>)")
    ap.add_argument("--set", action="append", default=[], metavar="KEY=VALUE")
    return ap


def main(argv=None):
    try:
        args = parser().parse_args(argv)
    except SystemExit as e:
        return 2 if e.code else 0
    started = _now()
    try:
        pairs = read_config(args.config) if args.config else []
        for kv in args.set:
            if "=" not in kv:
                raise UsageError(f"--set expects key=value, got {kv!r}")
            k, v = kv.split("=", 1)
            pairs.append((k.strip(), v.strip()))
        if args.seed is not None:
            pairs.append(("seed", str(args.seed)))
        cfg, echo = build_config(args.command, pairs)
    except (UsageError, OSError) as e:
        print(f"mb-lab: {e}", file=sys.stderr)
        return 2
    root = Path(os.environ.get(OUT_ENV, DEFAULT_ROOT))
    tag = hashlib.sha256(json.dumps(echo, sort_keys=True).encode()).hexdigest()[:8]
    out = Path(args.out) if args.out else root / f"{args.command}-{tag}"
    w = RunWriter(out)
    try:
        if args.command == "report":
            fails = cmd_report(cfg, w, root)
        else:
            fails = COMMANDS[args.command](cfg, w)
    except UsageError as e:
        print(f"mb-lab: {e}", file=sys.stderr)
        w.manifest({"command": args.command, **echo}, 2, [str(e)], started)
        return 2
    except (FloatingPointError, ArithmeticError, RuntimeError) as e:
        fails = [f"numerical failure: {e}"]
    status = 1 if fails else 0
    w.manifest({"command": args.command, **echo}, status, fails, started)
    for f in fails:
        print(f"FAIL {f}", file=sys.stderr)
    print(f"{args.command}: {'pass' if not fails else 'fail'} -> {out}")
    return status


if __name__ == "__main__":
    sys.exit(main())
