"""Command-line entry point: ``pngdet <subcommand> [flags]``.

Settings resolve as flags > ``--config`` JSON file > environment > defaults.
Every output file embeds a manifest (subcommand, resolved config, seed, code
version) and is reproducible byte for byte from it; wall-clock timestamps go
to a sidecar ``<out>.run.json`` so they do not perturb the output itself.
Errors are reported on stderr as one JSON object and a nonzero exit code.
"""
from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import os
import sys
from datetime import datetime, timezone

import numpy as np

from . import airy, circle, lattice, montecarlo, toeplitz, verify
from .determinantal import DegenerateSystemError

DEFAULT_SEED = 20030101


class CLIError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CLIError(message)


# name -> (type, default, help); a default of None means "required or optional without default"
_float_list = lambda s: [float(v) for v in s.split(",") if v.strip()]  # noqa: E731
_int_list = lambda s: [int(v) for v in s.split(",") if v.strip()]  # noqa: E731

SPECS = {
    "simulate-png": {
        "N": (int, 128, "lattice size: G(N,N) and the anti-diagonal i+j=2N"),
        "q": (float, 0.25, "geometric parameter, P[w=k] = (1-q) q^k"),
        "samples": (int, 20000, "number of replicas"),
        "seed": (int, None, "master seed (default from PNG_DET_SEED or built in)"),
        "observable": (str, "point", "point | gpl | two_time | transversal"),
        "ref": (str, "tw2", "reference law: tw2 | tw1 | airy (two_time)"),
        "grid": (_float_list, [-3.0, -2.0, -1.0, 0.0, 1.0, 2.0], "comma separated xi values"),
        "tau": (float, 1.0, "rescaled time for the two_time observable"),
        "xi1": (float, 0.0, "level at time 0 (two_time)"),
        "xi2": (float, 0.0, "level at time tau (two_time)"),
        "workers": (int, 1, "worker processes (results do not depend on it)"),
        "canary_fraction": (float, 0.01, "fraction of replicas re-checked through the lattice module"),
        "out": (str, None, "JSON report path (stdout when omitted)"),
        "csv": (str, None, "optional CSV table of the empirical and reference CDFs"),
    },
    "lpp": {
        "M": (int, 8, "rows of the rectangle"),
        "N": (int, 8, "columns of the rectangle"),
        "q": (float, 0.25, "geometric parameter"),
        "seed": (int, None, "master seed"),
        "replica": (int, 0, "replica index within the seed"),
        "weights": (str, None, "CSV weight field to use instead of sampling"),
        "out": (str, None, "CSV path for the last-passage table"),
    },
    "kernel-eval": {
        "q": (float, 0.25, "geometric parameter (alpha = sqrt q)"),
        "N": (int, 16, "PNG size"),
        "u": (int, 0, "first time index (site 2u)"),
        "v": (int, 0, "second time index"),
        "x_min": (int, None, "smallest height (default a N - 3 d N^(1/3))"),
        "x_max": (int, None, "largest height (default a N + 3 d N^(1/3))"),
        "tilde_only": (bool, False, "omit the phi part"),
        "out": (str, None, "CSV path"),
    },
    "fredholm": {
        "q": (float, 0.25, "geometric parameter"),
        "N": (int, 16, "PNG size"),
        "u": (int, 0, "offset: P[G(N+u, N-u) <= level]"),
        "levels": (_int_list, None, "comma separated levels (default around a N)"),
        "u2": (int, None, "second offset for a two-time gap probability"),
        "level2": (int, None, "level at the second offset"),
        "out": (str, None, "CSV path"),
    },
    "tw-dist": {
        "xi_min": (float, -5.0, "first xi"),
        "xi_max": (float, 2.0, "last xi"),
        "step": (float, 0.1, "grid step"),
        "check": (bool, False, "cross-check F2 against the Nystrom determinant at every point"),
        "out": (str, None, "CSV path"),
    },
    "airy-fdd": {
        "taus": (_float_list, [0.0], "comma separated times"),
        "xis": (_float_list, [0.0], "comma separated levels"),
        "m_q": (int, 48, "quadrature nodes per time"),
        "L": (float, 12.0, "truncation length"),
        "out": (str, None, "JSON path"),
    },
    "circle-walk": {
        "N_sites": (int, 5, "sites on the circle"),
        "n": (int, 3, "number of walkers (odd)"),
        "p_step": (float, 0.5, "probability of a step"),
        "times": (_int_list, [0, 1], "comma separated times for the kernel table"),
        "out": (str, None, "CSV path"),
    },
    "transversal": {
        "N": (int, 64, "lattice size"),
        "q": (float, 0.25, "geometric parameter"),
        "samples": (int, 20000, "number of replicas"),
        "seed": (int, None, "master seed"),
        "workers": (int, 1, "worker processes"),
        "out": (str, None, "JSON path"),
    },
    "convergence": {
        "q": (float, 0.25, "geometric parameter"),
        "Ns": (_int_list, [25, 100, 400], "comma separated sizes"),
        "tau": (float, 0.0, "first rescaled time"),
        "xi": (float, 0.0, "first rescaled height"),
        "tau2": (float, 0.0, "second rescaled time"),
        "xi2": (float, 0.5, "second rescaled height"),
        "out": (str, None, "CSV path"),
    },
    "verify": {
        "quick": (bool, False, "small-instance suite only"),
        "out": (str, None, "JSON path"),
    },
}


def _build_parser():
    p = _Parser(prog="pngdet", description="Discrete PNG, determinantal kernels and Airy-process numerics.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, spec in SPECS.items():
        sp = sub.add_parser(name, help=f"{name} (see --help)")
        sp.add_argument("--config", default=None, help="JSON file of settings (flags take precedence)")
        for key, (typ, default, help_) in spec.items():
            flag = "--" + key.replace("_", "-")
            h = f"{help_} [default: {default}]"
            if typ is bool:
                sp.add_argument(flag, dest=key, action="store_const", const=True, default=None, help=h)
            else:
                sp.add_argument(flag, dest=key, type=typ, default=None, help=h)
    return p


def resolve(command, args, env=None):
    """Merge defaults, environment, config file and flags."""
    env = os.environ if env is None else env
    spec = SPECS[command]
    cfg = {k: v[1] for k, v in spec.items()}
    if "seed" in spec:
        cfg["seed"] = int(env["PNG_DET_SEED"]) if env.get("PNG_DET_SEED") else DEFAULT_SEED
    if args.config:
        with open(args.config) as fh:
            data = json.load(fh)
        if isinstance(data, dict) and isinstance(data.get("manifest"), dict):
            data = data["manifest"]
        if isinstance(data, dict) and isinstance(data.get("config"), dict):
            data = data["config"]
        unknown = set(data) - set(spec)
        if unknown:
            raise CLIError(f"unknown config keys for {command}: {sorted(unknown)}")
        cfg.update(data)
    for k in spec:
        v = getattr(args, k)
        if v is not None:
            cfg[k] = v
    return cfg


def manifest(command, cfg):
    return {"subcommand": command, "config": cfg, "seed": cfg.get("seed"),
            "code_version": montecarlo.code_version(), "outputs": [v for k, v in cfg.items()
                                                                 if k in ("out", "csv") and v]}


def _json_default(o):
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.floating,)):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, complex):
        return [o.real, o.imag]
    raise TypeError(f"not JSON serialisable: {type(o)}")


def _write_json(path, obj, stdout):
    text = json.dumps(obj, indent=1, sort_keys=True, default=_json_default) + "\n"
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        stdout.write(text)


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _write_csv(path, man, header, rows, stdout):
    buf = io.StringIO()
    buf.write("# manifest: " + json.dumps(man, sort_keys=True, default=_json_default) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(v) for v in r])
    if path:
        with open(path, "w") as fh:
            fh.write(buf.getvalue())
    else:
        stdout.write(buf.getvalue())


def _sidecar(cfg, man, start):
    for key in ("out", "csv"):
        path = cfg.get(key)
        if path:
            side = dict(man)
            side["start"] = start
            side["end"] = datetime.now(timezone.utc).isoformat()
            with open(path + ".run.json", "w") as fh:
                json.dump(side, fh, indent=1, sort_keys=True, default=_json_default)
                fh.write("\n")


# ------------------------------------------------------------------ commands

def cmd_simulate_png(cfg, man, stdout):
    obs = cfg["observable"]
    if obs not in montecarlo.OBSERVABLES:
        raise CLIError(f"unknown observable {obs!r}")
    ec = montecarlo.ExperimentConfig(N=cfg["N"], q=cfg["q"], sample_count=cfg["samples"], seed=cfg["seed"],
                                     observable=obs, grid=tuple(cfg["grid"]), workers=cfg["workers"],
                                     canary_fraction=cfg["canary_fraction"])
    ref = cfg["ref"]
    if obs == "point":
        if ref != "tw2":
            raise CLIError("observable point is compared with tw2")
        rep = montecarlo.g_point_vs_tw2(ec)
    elif obs == "gpl":
        if ref not in ("tw1", "tw2"):
            raise CLIError("observable gpl is compared with tw1 (and tw2 for contrast)")
        rep = montecarlo.gpl_vs_tw1(ec)
        if ref == "tw2":
            rep["ks"] = rep["ks_tw2"]
    elif obs == "two_time":
        rep = montecarlo.two_time_vs_airy(ec, cfg["tau"], cfg["xi1"], cfg["xi2"], exact=cfg["N"] <= 512)
    else:
        rep = montecarlo.transversal_histogram(ec)
    rep["manifest"] = dict(man, ensemble=rep.pop("manifest"))
    _write_json(cfg["out"], rep, stdout)
    if cfg["csv"] and "grid" in rep:
        _write_csv(cfg["csv"], man, ["xi", "empirical", "reference", "ci_low", "ci_high"],
                   zip(rep["grid"], rep["empirical"], rep["reference"], rep["ci"][0], rep["ci"][1]), stdout)


def cmd_lpp(cfg, man, stdout):
    if cfg["weights"]:
        field = lattice.WeightField.from_csv(cfg["weights"])
    else:
        field = lattice.sample_weight_field(lattice.GeomParams.homogeneous(cfg["q"]), cfg["M"], cfg["N"],
                                            cfg["seed"], replica=cfg["replica"])
    G = lattice.lpp_table(field)
    I, J = field.shape
    rows = [(i, j, int(field.w[i - 1, j - 1]), int(G[i, j])) for i in range(1, I + 1) for j in range(1, J + 1)]
    _write_csv(cfg["out"], man, ["i", "j", "w", "G"], rows, stdout)


def _png_params(cfg):
    return toeplitz.PNGKernelParams.from_q(cfg["q"], cfg["N"])


def cmd_kernel_eval(cfg, man, stdout):
    p = _png_params(cfg)
    c, s = p.a_star * p.N, p.d * p.N ** (1 / 3)
    lo = cfg["x_min"] if cfg["x_min"] is not None else int(c - 3 * s)
    hi = cfg["x_max"] if cfg["x_max"] is not None else int(c + 3 * s)
    xs = np.arange(lo, hi + 1)
    blk = toeplitz.png_kernel_block(p, cfg["u"], cfg["v"], xs, xs, tilde_only=bool(cfg["tilde_only"]))
    rows = [(int(x), int(y), blk.values[i, j]) for i, x in enumerate(xs) for j, y in enumerate(xs)]
    _write_csv(cfg["out"], man, ["x", "y", "K"], rows, stdout)


def cmd_fredholm(cfg, man, stdout):
    p = _png_params(cfg)
    c, s = p.a_star * p.N, p.d * p.N ** (1 / 3)
    levels = cfg["levels"] or list(range(int(c - 3 * s), int(c + 3 * s) + 1))
    if cfg["u2"] is None:
        vals = toeplitz.png_height_cdf(p, levels, u=cfg["u"])
        rows = [(int(l), (l - c) / s, v) for l, v in zip(levels, vals)]
        _write_csv(cfg["out"], man, ["level", "xi", "probability"], rows, stdout)
    else:
        if cfg["level2"] is None:
            raise CLIError("--level2 is required with --u2")
        rows = [(int(l), int(cfg["level2"]),
                 toeplitz.png_joint_cdf(p, cfg["u"], int(l), cfg["u2"], int(cfg["level2"]))) for l in levels]
        _write_csv(cfg["out"], man, ["level", "level2", "probability"], rows, stdout)


def cmd_tw_dist(cfg, man, stdout):
    if cfg["step"] <= 0 or cfg["xi_max"] < cfg["xi_min"]:
        raise CLIError("need step > 0 and xi_max >= xi_min")
    n = int(round((cfg["xi_max"] - cfg["xi_min"]) / cfg["step"])) + 1
    xs = cfg["xi_min"] + cfg["step"] * np.arange(n)
    F2 = airy.tw2(xs, check=bool(cfg["check"]))
    F1 = airy.tw1(xs)
    _write_csv(cfg["out"], man, ["xi", "F1", "F2"], zip(xs, F1, F2), stdout)


def cmd_airy_fdd(cfg, man, stdout):
    if len(cfg["taus"]) != len(cfg["xis"]):
        raise CLIError("taus and xis must have the same length")
    val = airy.airy_fdd(cfg["taus"], cfg["xis"], m_q=cfg["m_q"], L=cfg["L"])
    _write_json(cfg["out"], {"taus": cfg["taus"], "xis": cfg["xis"], "probability": val, "manifest": man}, stdout)


def cmd_circle_walk(cfg, man, stdout):
    p = circle.CircleWalkParams(cfg["N_sites"], cfg["n"], cfg["p_step"])
    rows = []
    for r in cfg["times"]:
        for s in cfg["times"]:
            for x in range(p.N_sites):
                for y in range(p.N_sites):
                    k = circle.cylinder_kernel(p, r, x, s, y)
                    rows.append(("kernel", r, x, s, y, k.real, k.imag))
    res = max(circle.cue_residual(p, xs) for xs in itertools.combinations(range(p.N_sites), p.n))
    rows.append(("cue_residual", "", "", "", "", res, 0.0))
    _write_csv(cfg["out"], man, ["kind", "r", "x", "s", "y", "re", "im"], rows, stdout)


def cmd_transversal(cfg, man, stdout):
    ec = montecarlo.ExperimentConfig(N=cfg["N"], q=cfg["q"], sample_count=cfg["samples"], seed=cfg["seed"],
                                     observable="transversal", workers=cfg["workers"])
    rep = montecarlo.transversal_histogram(ec)
    rep["manifest"] = dict(man, ensemble=rep.pop("manifest"))
    _write_json(cfg["out"], rep, stdout)


def cmd_convergence(cfg, man, stdout):
    rows = []
    for N in cfg["Ns"]:
        p = toeplitz.PNGKernelParams.from_q(cfg["q"], N)
        kn, lim, (u, x, v, y) = toeplitz.scaled_kernel_limit(p, cfg["tau"], cfg["xi"], cfg["tau2"], cfg["xi2"])
        lat = toeplitz.conjugated_airy_kernel(*toeplitz.lattice_scaled_point(p, u, x),
                                              *toeplitz.lattice_scaled_point(p, v, y))
        level = int(np.floor(p.a_star * N))
        gap = float(toeplitz.png_height_cdf(p, [level])[0])
        xi0 = (level - p.a_star * N) / (p.d * N ** (1 / 3))
        rows.append((N, u, x, v, y, kn, lim, lat, abs(kn - lat), gap, airy.tw2(xi0, check=False)))
    _write_csv(cfg["out"], man, ["N", "u", "x", "v", "y", "scaled_kernel", "airy_kernel",
                                 "airy_kernel_at_lattice_point", "abs_diff_lattice",
                                 "gap_probability", "F2"], rows, stdout)


def cmd_verify(cfg, man, stdout):
    res = verify.run(quick=bool(cfg["quick"]))
    for r in res:
        stdout.write(f"{'PASS' if r['ok'] else 'FAIL'}  {r['name']}  ({r['seconds']} s)\n")
    if cfg["out"]:
        _write_json(cfg["out"], {"results": res, "manifest": man}, stdout)
    if not all(r["ok"] for r in res):
        raise CLIError("verification failed: " + ", ".join(r["name"] for r in res if not r["ok"]))


COMMANDS = {
    "simulate-png": cmd_simulate_png, "lpp": cmd_lpp, "kernel-eval": cmd_kernel_eval,
    "fredholm": cmd_fredholm, "tw-dist": cmd_tw_dist, "airy-fdd": cmd_airy_fdd,
    "circle-walk": cmd_circle_walk, "transversal": cmd_transversal,
    "convergence": cmd_convergence, "verify": cmd_verify,
}


def _fail(kind, exc, stderr, code):
    stderr.write(json.dumps({"error": kind, "message": str(exc)}) + "\n")
    return code


def main(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except CLIError as e:
        return _fail("usage", e, stderr, 2)
    except SystemExit as e:  # --help
        return int(e.code or 0)
    start = datetime.now(timezone.utc).isoformat()
    try:
        cfg = resolve(args.command, args)
        man = manifest(args.command, cfg)
        COMMANDS[args.command](cfg, man, stdout)
        _sidecar(cfg, man, start)
    except CLIError as e:
        return _fail("invalid", e, stderr, 1)
    except (toeplitz.ContourConvergenceError, airy.QuadratureError, DegenerateSystemError, ArithmeticError) as e:
        return _fail("numerical", e, stderr, 3)
    except (ValueError, OSError, KeyError, TypeError) as e:
        return _fail(type(e).__name__, e, stderr, 1)
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
