"""Command-line interface.

Exit codes: 0 when every verdict passes, 1 when some verdict fails, 2 on
input errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import catalog
from .cut import CutSpec, cut_moment_consistency, cut_moment_identity_exact, polytope_cut
from .errors import QtoricError, Unsupported
from .extend import (decide_extendability, generic_stabilizer, synthesize_ghat_action,
                     synthesize_nhat_action)
from .lattice import kernel_lattice, projection_from_normals, smith_normal_form
from .momentgeo import (PolytopeQuotient, fixed_point_images, hull_membership_many, model_moment,
                        sample_level_set, sample_model)
from .polytope import HRepPolytope, enumerate_vertices, verify_delzant
from .quatgeom import identity_suite
from .serialize import (atomic_write, format_fraction, load_polytope, polytope_to_json,
                        samples_to_csv)

CACHE_ENV = "QTORIC_CACHE_DIR"
EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


@dataclass
class Report:
    verdicts: dict[str, bool] = field(default_factory=dict)
    data: dict = field(default_factory=dict)
    lines: list[str] = field(default_factory=list)
    table: tuple[list[str], list[list]] | None = None
    files: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(self.verdicts.values())

    def render(self, fmt: str) -> str:
        if fmt == "json":
            body = {"verdicts": self.verdicts, **self.data}
            if self.files:
                body["files"] = self.files
            return json.dumps(body, indent=2, default=_jsonable) + "\n"
        if fmt == "csv":
            if self.table is None:
                raise QtoricError("this command has no tabular output; use --format text or json")
            out = io.StringIO()
            w = csv.writer(out, lineterminator="\n")
            w.writerow(self.table[0])
            w.writerows(self.table[1])
            return out.getvalue()
        text = list(self.lines)
        text += [f"{name}: {'PASS' if ok else 'FAIL'}" for name, ok in self.verdicts.items()]
        text += [f"wrote {f}" for f in self.files]
        return "\n".join(text) + "\n"


def _jsonable(x):
    if isinstance(x, Fraction):
        return format_fraction(x)
    if isinstance(x, np.generic):
        return x.item()
    if isinstance(x, np.ndarray):
        return x.tolist()
    raise TypeError(f"cannot serialise {type(x).__name__}")


def _frac_list(v) -> list[str]:
    return [format_fraction(x) for x in v]


def _load(args) -> HRepPolytope:
    if not args.input:
        raise QtoricError("--input is required")
    path = Path(args.input)
    if path.exists():
        return load_polytope(path)
    name = args.input.removeprefix("catalog:")
    try:
        return catalog.load(name)
    except KeyError:
        raise QtoricError(f"no such file or catalog entry: {args.input}") from None


def _kernel(P):
    return kernel_lattice(projection_from_normals(P))


# ---------------------------------------------------------------- commands

def cmd_verify(args) -> Report:
    P = _load(args)
    rep = verify_delzant(P)
    r = Report()
    rows = []
    for c in rep.checks:
        pt = _frac_list(c.vertex.point)
        rows.append([" ".join(pt), " ".join(str(i + 1) for i in c.vertex.active_set),
                     c.simple, c.rational, c.smooth, c.determinant])
        flag = "" if (c.simple and c.smooth) else "   <-- fails"
        r.lines.append(f"vertex ({', '.join(pt)})  facets {[i + 1 for i in c.vertex.active_set]}"
                       f"  simple={c.simple} smooth={c.smooth} det={c.determinant}{flag}")
    r.table = (["vertex", "active_facets", "simple", "rational", "smooth", "determinant"], rows)
    r.data = {"polytope": P.name, "vertices": [
        {"point": _frac_list(c.vertex.point), "active_set": [i + 1 for i in c.vertex.active_set],
         "simple": c.simple, "rational": c.rational, "smooth": c.smooth,
         "determinant": c.determinant} for c in rep.checks]}
    r.verdicts["delzant"] = rep.is_delzant
    return r


def cmd_kernel(args) -> Report:
    P = _load(args)
    pi = projection_from_normals(P)
    divs = smith_normal_form(pi).divisors
    K = kernel_lattice(pi)
    r = Report()
    r.lines.append("pi =")
    r.lines += ["  " + " ".join(f"{x:3d}" for x in row) for row in pi.entries]
    r.lines.append(f"SNF divisors: {list(divs)}")
    r.lines.append("kernel basis:")
    r.lines += ["  " + " ".join(f"{x:3d}" for x in b) for b in K.basis]
    r.table = ([f"x{i + 1}" for i in range(K.ambient_dim)], [list(b) for b in K.basis])
    r.data = {"pi": pi.tolist(), "divisors": list(divs), "kernel_basis": [list(b) for b in K.basis]}
    r.verdicts["surjective"] = all(d == 1 for d in divs)
    return r


def cmd_extend(args) -> Report:
    P = _load(args)
    dec = decide_extendability(_kernel(P))
    r = Report()
    r.verdicts["extendable"] = dec.extendable
    r.data = {"extendable": dec.extendable, "reason": dec.reason,
              "short_vectors": dec.short_vectors, "reduced_bases": dec.reduced_bases}
    if dec.extendable:
        cols = [list(c) for c in dec.witness.columns]
        table = synthesize_nhat_action(dec.witness)
        r.lines.append("verdict: Extendable")
        r.lines.append(f"witness basis: {cols}")
        r.lines.append("A_B =")
        r.lines += ["  " + " ".join(f"{x:2d}" for x in row) for row in dec.witness.rows]
        r.lines.append("action:")
        r.lines += ["  " + line for line in table.format_lines()]
        r.data.update(witness=cols, action=table.format_lines())
        r.table = ([f"b{i + 1}" for i in range(dec.witness.k)], [list(row) for row in dec.witness.rows])
    else:
        r.lines.append(f"verdict: NotExtendable ({dec.reason})")
    return r


def cmd_action(args) -> Report:
    P = _load(args)
    dec = decide_extendability(_kernel(P))
    r = Report()
    if not dec.extendable:
        r.lines.append(f"no action: {dec.reason}")
        r.verdicts["extendable"] = False
        return r
    table = synthesize_nhat_action(dec.witness)
    if args.ghat:
        try:
            table = synthesize_ghat_action(P, table)
        except Unsupported as exc:
            r.lines.append(f"G-hat action unsupported: {exc}")
            r.verdicts["ghat"] = False
            return r
    r.lines += table.format_lines()
    if args.ghat:
        # G-hat fixes the vertex preimages, so only generic points can be free
        r.verdicts["free at generic points"] = generic_stabilizer(table, ()).free
    else:
        free = all(generic_stabilizer(table, v.active_set).free for v in enumerate_vertices(P))
        r.verdicts["free at vertex zero patterns"] = free
    r.data = {"action": table.format_lines()}
    return r


def _output_dir(args) -> Path:
    if args.output:
        return Path(args.output)
    return Path(os.environ.get(CACHE_ENV) or ".")


def cmd_moment_image(args) -> Report:
    r = Report()
    tol = args.tolerance if args.tolerance is not None else 1e-7
    out = _output_dir(args)
    if args.model:
        M = catalog.model(args.model)
        points = sample_model(M, args.samples, args.seed)
        images = np.array([model_moment(M, p) for p in points])
        hull = fixed_point_images(M)
        name, cols = args.model, [f"sigma{i + 1}" for i in range(images.shape[1])]
        rows = images
    else:
        P = _load(args)
        K = _kernel(P)
        S = sample_level_set(P, K, args.samples, args.seed)
        M = PolytopeQuotient(P, K)
        hull = fixed_point_images(P)
        images = S.projections
        name = P.name or Path(args.input).stem
        cols = [f"sigma{i + 1}" for i in range(P.d)] + [f"x{i + 1}" for i in range(P.dim)]
        rows = np.hstack([S.images, S.projections])
    inside = [c.inside for c in hull_membership_many(hull, images, tol)]
    meta = {"polytope": name, "seed": args.seed, "samples": args.samples}
    atomic_write(out / "images.csv", samples_to_csv(cols, rows, meta))
    atomic_write(out / "hull.csv", samples_to_csv(
        [f"a{i + 1}" for i in range(hull.shape[1])], hull, {"polytope": name}))
    r.files = [str(out / "images.csv"), str(out / "hull.csv")]
    r.lines.append(f"{sum(inside)}/{len(inside)} images inside the hull of {len(hull)} fixed-point images")
    r.verdicts["images in hull"] = all(inside)
    r.data = {"inside": int(sum(inside)), "samples": len(inside), "hull": hull}
    return r


def cmd_cut(args) -> Report:
    P = _load(args)
    if args.facet is None or args.level is None:
        raise QtoricError("cut needs --facet and --level")
    try:
        level = Fraction(args.level)
    except ValueError:
        raise QtoricError(f"level {args.level!r} is not a rational number") from None
    res = polytope_cut(P, CutSpec(args.facet, level))
    r = Report()
    text = polytope_to_json(res.polytope)
    if args.output:
        atomic_write(args.output, text)
        r.files.append(args.output)
    else:
        r.lines.append(text.rstrip())
    r.verdicts["delzant after cut"] = True
    r.data = {"polytope": json.loads(text), "dropped_facets": [i + 1 for i in res.dropped]}
    if args.verify:
        tol = args.tolerance if args.tolerance is not None else 1e-9
        n = min(args.samples, 1000)
        cons = cut_moment_consistency(P, res, n, args.seed)
        r.lines.append(f"composed moment residual over {n} samples: {cons.residual:.3e}")
        r.verdicts["moment composition (exact)"] = cut_moment_identity_exact(res)
        r.verdicts["moment composition (sampled)"] = cons.residual <= tol
        r.data["residual"] = cons.residual
    return r


def cmd_catalog(args) -> Report:
    r = Report()
    rows = []
    for name in catalog.polytope_names():
        P = catalog.load(name)
        delz = verify_delzant(P).is_delzant
        rows.append([name, P.dim, P.d, delz, catalog.description(name)])
        r.lines.append(f"{name:24s} dim={P.dim} facets={P.d} delzant={delz}  {catalog.description(name)}")
    r.lines.append("models:")
    for name, (_, desc) in catalog.MODELS.items():
        rows.append([name, "", "", "", desc])
        r.lines.append(f"  {name:22s} {desc}")
    r.table = (["name", "dim", "facets", "delzant", "description"], rows)
    r.data = {"entries": [dict(zip(r.table[0], row)) for row in rows]}
    return r


def cmd_check_4plectic(args) -> Report:
    samples = min(args.samples, 1000) if args.samples_given is None else args.samples
    fd_tol = args.tolerance if args.tolerance is not None else 1e-6
    checks = identity_suite(args.d, samples, args.seed, fd_tol=fd_tol)
    r = Report()
    r.lines.append(f"{'check':34s} {'residual':>12s} {'tolerance':>10s}")
    for c in checks:
        r.lines.append(f"{c.name:34s} {c.residual:12.3e} {c.tolerance:10.1e}")
        r.verdicts[c.name] = c.passed
    r.table = (["check", "residual", "tolerance", "passed"],
               [[c.name, c.residual, c.tolerance, c.passed] for c in checks])
    r.data = {"checks": [{"name": c.name, "residual": c.residual, "tolerance": c.tolerance}
                         for c in checks]}
    return r


COMMANDS = {
    "verify": (cmd_verify, "check the Delzant conditions vertex by vertex"),
    "kernel": (cmd_kernel, "print pi, its Smith divisors and the kernel lattice"),
    "extend": (cmd_extend, "decide whether the torus action extends to Sp(1)^(d-m)"),
    "action": (cmd_action, "print the action table of N-hat (or with --ghat, of G-hat x N-hat)"),
    "moment-image": (cmd_moment_image, "sample moment images and certify hull containment"),
    "cut": (cmd_cut, "cut a polytope parallel to a facet"),
    "catalog": (cmd_catalog, "list built-in polytopes and models"),
    "check-4plectic": (cmd_check_4plectic, "run the flat-model differential identities"),
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input", help="polytope JSON file or catalog name")
    common.add_argument("--output", help="output file or directory")
    common.add_argument("--samples", type=int, default=None, help="sample count (default 10000)")
    common.add_argument("--seed", type=int, default=42)
    common.add_argument("--tolerance", type=float, default=None)
    common.add_argument("--format", choices=("text", "json", "csv"), default="text")
    parser = argparse.ArgumentParser(prog="qtoric", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_) in COMMANDS.items():
        p = sub.add_parser(name, parents=[common], help=help_)
        if name == "action":
            p.add_argument("--ghat", action="store_true")
        elif name == "moment-image":
            p.add_argument("--model", help="catalog model instead of a polytope, e.g. hp2 or blowup:1/2,1/2,1/2")
        elif name == "cut":
            p.add_argument("--facet", type=int, help="zero-based index of the facet to cut parallel to")
            p.add_argument("--level", help="rational level a of the new facet <x, -v_j> <= a")
            p.add_argument("--verify", action="store_true")
        elif name == "check-4plectic":
            p.add_argument("--d", type=int, default=2)
    return parser


def run(argv=None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    parser = build_parser()
    args = parser.parse_args(argv)
    args.samples_given = args.samples
    if args.samples is None:
        args.samples = 10000
    try:
        if args.samples < 1:
            raise QtoricError("--samples must be at least 1")
        if args.tolerance is not None and args.tolerance <= 0:
            raise QtoricError("--tolerance must be positive")
        report = COMMANDS[args.command][0](args)
        stdout.write(report.render(args.format))
    except (QtoricError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    return EXIT_OK if report.ok else EXIT_FAIL


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
