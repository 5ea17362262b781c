"""Command-line front end: config parsing, CSV emission, run manifests.

Every run reads one JSON config, executes a single pipeline and writes
CSV artifacts plus run_manifest.json into the output directory.  Output
is deterministic for a fixed config regardless of --threads.
"""

import argparse
import hashlib
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .errors import ConfigError, ComputationError
from .operator import parse_operator, expand_standard_form
from .monodromy import monodromy, TOL_MIN, TOL_MAX
from .multipliers import track_branches, TrackOptions
from .bands import detect_bands, parametrize_band
from .expansion import (BandNodes, forward_transform, inverse_transform,
                        parseval, bloch_eigs, spectral_matrix,
                        reconstruct_U, hill_compare)
from .profiles import make_profile
from .oracles import mathieu_fourier_edges, free_band_edges, free_multiplier
from . import __version__

SCHEMAS = {
    "branch": ("mu", "k", "rho_re", "rho_im", "abs_rho"),
    "collisions": ("mu_lo", "mu_hi", "k1", "k2", "on_unit_circle"),
    "bands": ("k", "j", "mu_lo", "mu_hi", "t_lo", "t_hi",
              "orientation", "degenerate"),
    "mesh": ("k", "j", "t", "mu", "dmu_dt"),
    "transform": ("k", "j", "t", "mu", "phi_re", "phi_im", "p", "w"),
    "reconstruction": ("x", "f_re", "f_im"),
    "spectral_matrix": ("mu", "q", "qp", "M_re", "M_im"),
    "u_dump": ("mu_re", "mu_im", "i", "j", "U_re", "U_im"),
    "bloch": ("t", "mu", "norm_rel_err"),
    "edges": ("index", "mu"),
}


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return f"{float(v):.17g}"


def emit_csv(path, schema_id, rows):
    """Write rows (iterables matching the schema) with a fixed header."""
    cols = SCHEMAS.get(schema_id)
    if cols is None:
        raise ConfigError(f"unknown CSV schema: {schema_id!r}")
    with open(path, "w") as fh:
        fh.write(",".join(cols) + "\n")
        for row in rows:
            row = tuple(row)
            if len(row) != len(cols):
                raise ConfigError(
                    f"row width {len(row)} does not match schema "
                    f"{schema_id!r} ({len(cols)} columns)")
            fh.write(",".join(_fmt(v) for v in row) + "\n")
    return path


class RunConfig:
    """Validated run configuration."""

    def __init__(self, doc):
        if not isinstance(doc, dict):
            raise ConfigError("config must be a JSON object")
        try:
            self.operator = parse_operator(doc["operator"])
        except KeyError:
            raise ConfigError("config missing field 'operator'") from None
        rng = doc.get("mu_range", [-2.0, 64.0])
        if len(rng) != 2 or not rng[0] < rng[1]:
            raise ConfigError(f"mu_range must be [lo, hi] with lo < hi: {rng}")
        self.mu_range = (float(rng[0]), float(rng[1]))
        self.grid_density = int(doc.get("grid_density", 200))
        if self.grid_density < 16:
            raise ConfigError("grid_density must be >= 16")
        tol = doc.get("tolerances", {})
        self.ode_tol = float(tol.get("ode_tol", 1e-11))
        if not (TOL_MIN <= self.ode_tol <= TOL_MAX):
            raise ConfigError(f"ode_tol out of range [{TOL_MIN}, {TOL_MAX}]")
        self.band_tol = float(tol.get("band_tol", 1e-7))
        self.collision_tol = float(tol.get("collision_tol", 1e-6))
        if not (0 < self.band_tol <= 1e-2 and 0 < self.collision_tol <= 1e-2):
            raise ConfigError("band_tol and collision_tol must be in (0, 1e-2]")
        tf = doc.get("test_function", {"kind": "bump"})
        self.profile = make_profile(tf.get("kind", "bump"),
                                    center=float(tf.get("center", 0.0)),
                                    width=float(tf.get("width", 1.0)),
                                    support_radius=float(
                                        tf.get("support_radius", 4.0)))
        self.output_dir = doc.get("output_dir", "out")
        self.mesh_N = int(doc.get("mesh_N", 12))
        if self.mesh_N < 2:
            raise ConfigError("mesh_N must be >= 2")
        self.t_values = [float(t) for t in doc.get("t_values", [np.pi / 2])]
        self.doc = doc


def _pmap(fn, items, threads):
    """Order-preserving map, threaded when threads != 1."""
    items = list(items)
    if threads == 1 or len(items) < 2:
        return [fn(it) for it in items]
    workers = threads if threads > 0 else (os.cpu_count() or 1)
    with ThreadPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, items))


class Runner:
    def __init__(self, cfg, out_dir, threads):
        self.cfg = cfg
        self.out = out_dir
        self.threads = threads
        self.sf = expand_standard_form(cfg.operator)
        self.files = []
        self.results = {}
        self._table = None
        self._atlas = None
        self._nodes = None

    def path(self, name):
        p = os.path.join(self.out, name)
        self.files.append(p)
        return p

    def table(self):
        if self._table is None:
            lo, hi = self.cfg.mu_range
            opts = TrackOptions(ode_tol=self.cfg.ode_tol,
                                collision_tol=self.cfg.collision_tol)
            self._table = track_branches(self.sf, lo, hi, opts=opts,
                                         num_points=self.cfg.grid_density)
        return self._table

    def atlas(self):
        if self._atlas is None:
            self._atlas = detect_bands(self.table(), self.sf,
                                       tol=self.cfg.band_tol,
                                       ode_tol=self.cfg.ode_tol)
        return self._atlas

    def nodes(self):
        if self._nodes is None:
            full = [b for b in self.atlas().bands
                    if not (b.degenerate or b.truncated)]

            def build(band):
                mesh = parametrize_band(self.sf, band, self.cfg.mesh_N,
                                        ode_tol=self.cfg.ode_tol)
                return BandNodes(self.sf, mesh, ode_tol=self.cfg.ode_tol)

            self._nodes = _pmap(build, full, self.threads)
        return self._nodes

    # --- subcommands -------------------------------------------------

    def cmd_multipliers(self):
        tb = self.table()
        rows = []
        for i, mu in enumerate(tb.mu_grid):
            for k in range(tb.n_branches):
                r = tb.rho[k, i]
                rows.append((mu, k + 1, r.real, r.imag, abs(r)))
        emit_csv(self.path("branches.csv"), "branch", rows)
        emit_csv(self.path("collisions.csv"), "collisions",
                 [(ev.mu_interval[0], ev.mu_interval[1],
                   ev.branch_pair[0] + 1, ev.branch_pair[1] + 1,
                   ev.on_unit_circle) for ev in tb.collisions])
        self.results["n_branches"] = tb.n_branches
        self.results["n_collisions"] = len(tb.collisions)

    def cmd_bands(self):
        atlas = self.atlas()
        bands = sorted(atlas.bands, key=lambda b: (b.k, b.j))
        emit_csv(self.path("bands.csv"), "bands",
                 [(b.k + 1, b.j + 1, b.mu_interval[0], b.mu_interval[1],
                   b.t_interval[0], b.t_interval[1], b.orientation,
                   b.degenerate) for b in bands])
        rows = []
        for bn in self.nodes():
            b = bn.band
            for i in range(bn.t.size):
                rows.append((b.k + 1, b.j + 1, bn.t[i], bn.mu[i], bn.dmu[i]))
        emit_csv(self.path("mesh.csv"), "mesh", rows)
        self.results["n_bands"] = len(bands)
        self.results["spectrum"] = [list(iv) for iv in atlas.spectrum]

    def cmd_expand(self):
        f, supp = self.cfg.profile
        tv = forward_transform(self.sf, self.nodes(), f, supp)
        rows = []
        for part in tv.parts:
            bn = part.nodes
            b = bn.band
            for i in range(bn.t.size):
                rows.append((b.k + 1, b.j + 1, bn.t[i], bn.mu[i],
                             part.phi[i].real, part.phi[i].imag,
                             bn.p[i], bn.w[i]))
        emit_csv(self.path("transform.csv"), "transform", rows)
        xs = np.linspace(-4 * np.pi, 4 * np.pi, 257)
        rec = inverse_transform(self.sf, tv, xs)
        emit_csv(self.path("reconstruction.csv"), "reconstruction",
                 [(x, r.real, r.imag) for x, r in zip(xs, rec)])
        err = np.abs(rec - f(xs))
        self.results["roundtrip_max_err"] = float(np.max(err))

    def cmd_parseval(self):
        f, supp = self.cfg.profile
        lhs, rhs, rel = parseval(self.sf, self.nodes(), f, supp)
        self.results["parseval"] = {"lhs": lhs, "rhs": rhs, "rel_err": rel}

    def cmd_bloch(self):
        rows = []
        for t in self.cfg.t_values:
            out = bloch_eigs(self.sf, t, self.cfg.mu_range, self.atlas(),
                             ode_tol=self.cfg.ode_tol)
            for mu, _, rel in out:
                rows.append((t, mu, rel))
        emit_csv(self.path("bloch.csv"), "bloch", rows)
        self.results["n_bloch_eigs"] = len(rows)

    def cmd_spectral_matrix(self):
        rows = []
        worst_herm = 0.0
        samples = []
        for b in self.atlas().bands:
            if b.degenerate or b.truncated:
                continue
            lo, hi = b.mu_interval
            samples.extend(lo + frac * (hi - lo) for frac in (0.25, 0.5, 0.75))
        for mu in sorted(set(samples)):
            sm = spectral_matrix(self.sf, self.atlas(), mu,
                                 ode_tol=self.cfg.ode_tol)
            worst_herm = max(worst_herm,
                             float(np.max(np.abs(sm.M - sm.M.conj().T))))
            d = sm.M.shape[0]
            for q in range(d):
                for qp in range(d):
                    rows.append((mu, q + 1, qp + 1,
                                 sm.M[q, qp].real, sm.M[q, qp].imag))
        emit_csv(self.path("spectral_matrix.csv"), "spectral_matrix", rows)
        self.results["hermiticity_defect"] = worst_herm

    def cmd_reconstruct(self):
        rows = []
        worst = 0.0
        for b in self.atlas().bands:
            if b.degenerate or b.truncated:
                continue
            mu = 0.5 * (b.mu_interval[0] + b.mu_interval[1])
            _, U, err = reconstruct_U(self.sf, mu, ode_tol=self.cfg.ode_tol)
            worst = max(worst, float(err))
            d = U.shape[0]
            for i in range(d):
                for j in range(d):
                    rows.append((mu, 0.0, i + 1, j + 1,
                                 U[i, j].real, U[i, j].imag))
        emit_csv(self.path("monodromy.csv"), "u_dump", rows)
        self.results["reconstruction_max_rel_err"] = worst

    def cmd_hill_check(self):
        f, supp = self.cfg.profile
        xs = np.linspace(-2 * np.pi, 2 * np.pi, 101)
        gap = hill_compare(self.sf, self.nodes(), f, xs, supp)
        self.results["hill_max_gap"] = gap

    def cmd_oracle(self, kind):
        if kind == "mathieu-edges":
            amp = 1.0
            p0 = self.cfg.operator.coeffs[0]
            if self.cfg.operator.n == 1 and p0.degree >= 1:
                amp = float(p0.coeff(1).real)
            edges = mathieu_fourier_edges(amp, count=6)
            emit_csv(self.path("oracle_edges.csv"), "edges",
                     [(i + 1, e) for i, e in enumerate(edges)])
        elif kind == "free-edges":
            emit_csv(self.path("oracle_edges.csv"), "edges",
                     [(i + 1, e) for i, e in enumerate(free_band_edges(7))])
        elif kind == "free-multipliers":
            n = self.cfg.operator.n
            lo, hi = self.cfg.mu_range
            mus = np.geomspace(max(lo, 1e-3), hi, self.cfg.grid_density)
            rows = []
            for mu in mus:
                for k in range(2 * n):
                    r = free_multiplier(n, mu, k)
                    rows.append((mu, k + 1, r.real, r.imag, abs(r)))
            emit_csv(self.path("oracle_branches.csv"), "branch", rows)
        else:
            raise ConfigError(f"unknown oracle kind: {kind!r}")
        self.results["oracle"] = kind


def _manifest(runner, args, wall):
    import scipy
    files = {}
    for p in runner.files:
        with open(p, "rb") as fh:
            files[os.path.basename(p)] = hashlib.sha256(fh.read()).hexdigest()
    return {
        "subcommand": args.subcommand,
        "config": runner.cfg.doc,
        "threads": args.threads,
        "versions": {
            "floquet1d": __version__,
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "python": sys.version.split()[0],
        },
        "wall_time_s": wall,
        "results": runner.results,
        "files": files,
    }


def build_parser():
    ap = argparse.ArgumentParser(
        prog="floquet1d",
        description="Band structure and eigenfunction expansions of "
                    "1-D periodic operators of order 2n.")
    ap.add_argument("subcommand",
                    choices=["multipliers", "bands", "expand", "parseval",
                             "bloch", "spectral-matrix", "reconstruct",
                             "hill-check", "oracle"])
    ap.add_argument("oracle_kind", nargs="?", default=None,
                    help="for `oracle`: mathieu-edges, free-edges or "
                         "free-multipliers")
    ap.add_argument("--config", required=True, help="path to the JSON config")
    ap.add_argument("--out", default=None,
                    help="output directory (overrides config output_dir)")
    ap.add_argument("--threads", type=int, default=0,
                    help="worker threads; 0 means auto")
    return ap


def run_command(argv):
    args = build_parser().parse_args(argv)
    t0 = time.time()
    try:
        with open(args.config) as fh:
            cfg = RunConfig(json.load(fh))
    except (OSError, json.JSONDecodeError) as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    out_dir = args.out or cfg.output_dir
    os.makedirs(out_dir, exist_ok=True)
    runner = Runner(cfg, out_dir, args.threads)
    try:
        if args.subcommand == "oracle":
            if args.oracle_kind is None:
                print("config error: `oracle` needs a kind", file=sys.stderr)
                return 2
            runner.cmd_oracle(args.oracle_kind)
        else:
            getattr(runner, "cmd_" + args.subcommand.replace("-", "_"))()
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    except ComputationError as e:
        print(f"computation failed: {e}", file=sys.stderr)
        return 1
    manifest = _manifest(runner, args, time.time() - t0)
    with open(os.path.join(out_dir, "run_manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return 0


def main():
    sys.exit(run_command(sys.argv[1:]))


if __name__ == "__main__":
    main()
