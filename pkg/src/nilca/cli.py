"""Command-line interface.

Every subcommand is deterministic given its inputs and ``--seed``; JSON
reports carry ``schema``, the tool version and the seed.  Exit codes: 0 on
success, 1 on a mathematical failure (invalid table, missing isomorphism,
audit misses under ``--strict``), 2 on usage errors.
"""

from __future__ import annotations

import json
import os
import sys

import click

from . import __version__
from .errors import NilcaError, ValidationError
from .fields import Field, find_embedding
from .freelie import WeightedGenerators, free_lla
from .lla import LLA, Morphism, Subspace, Vec, lla_from_text, load_lla, save_lla
from . import generic as gen
from .amalgam import Span, free_amalgam
from .scalext import extend_scalars
from .suite import independence_axiom_suite

JSON_SCHEMA = 1


def report(payload: dict, as_json: bool, human: str, seed=None) -> None:
    if as_json:
        doc = {"schema": JSON_SCHEMA, "tool": "nilca", "version": __version__}
        if seed is not None:
            doc["seed"] = seed
        doc.update(payload)
        click.echo(json.dumps(doc, indent=1))
    else:
        click.echo(human)


def fail(message: str, as_json: bool = False, payload: dict | None = None) -> "NoReturn":
    if as_json:
        doc = {"schema": JSON_SCHEMA, "tool": "nilca", "version": __version__, "error": message}
        if payload:
            doc.update(payload)
        click.echo(json.dumps(doc, indent=1))
    else:
        click.echo(f"error: {message}", err=True)
    sys.exit(1)


def parse_field_opts(p: int, m: int, mod: str | None) -> Field:
    modulus = tuple(int(x) for x in mod.split(",")) if mod else None
    return Field(p, m, modulus)


@click.group()
@click.version_option(__version__, prog_name="nilca")
def main():
    """Exact calculator for filtered nilpotent Lie algebras."""


# ---------------------------------------------------------------------------


@main.command()
@click.argument("path", type=click.Path(exists=True))
@click.option("--json", "as_json", is_flag=True)
def validate(path, as_json):
    """Validate a .lla file; exit 1 with the violated rule if invalid."""
    try:
        lla = load_lla(path)
    except ValidationError as exc:
        fail(
            f"invalid: {exc.condition} violated at indices {exc.witness}",
            as_json,
            {"condition": exc.condition, "witness": list(exc.witness)},
        )
    except NilcaError as exc:
        fail(str(exc), as_json)
    report(
        {"result": {"valid": True, "dim": lla.n, "profile": list(lla.profile.dims)}},
        as_json,
        f"valid, profile {lla.profile.dims}",
    )


def _parse_vectors(lla: LLA, text: str) -> list[Vec]:
    vecs = []
    for part in text.split(";"):
        coords = [lla.field.parse(x) for x in part.split(",")]
        if len(coords) != lla.n:
            raise click.UsageError(f"vector {part!r} has {len(coords)} coordinates, need {lla.n}")
        vecs.append(lla.vec(coords))
    return vecs


@main.command(name="str")
@click.argument("path", type=click.Path(exists=True))
@click.option("--vectors", required=True, help="semicolon-separated coordinate vectors")
@click.option("--json", "as_json", is_flag=True)
def str_cmd(path, vectors, as_json):
    """Structure constants of a tuple, if it is a subalgebra basis."""
    lla = load_lla(path)
    vecs = _parse_vectors(lla, vectors)
    table = lla.str_of(vecs)
    if table is None:
        fail("tuple is not the basis of a subalgebra", as_json)
    entries = [
        [i + 1, j + 1, k + 1, lla.field.format(v)]
        for (i, j), col in sorted(table.items())
        for k, v in sorted(col.items())
    ]
    human = "\n".join(" ".join(str(x) for x in e) for e in entries) or "(abelian)"
    report({"result": {"n": len(vecs), "alpha": entries}}, as_json, human)


@main.command()
@click.option("--gens", required=True, help='e.g. "x:1,y:1,z:2"')
@click.option("--p", type=int, required=True)
@click.option("--m", type=int, default=1)
@click.option("--mod", default=None, help="comma-separated modulus coefficients")
@click.option("--c", "c_bound", type=int, default=2)
@click.option("--cap", type=int, default=64)
@click.option("--out", type=click.Path(), required=True)
@click.option("--json", "as_json", is_flag=True)
def free(gens, p, m, mod, c_bound, cap, out, as_json):
    """Free nilpotent algebra on weighted generators; writes .lla + labels."""
    field = parse_field_opts(p, m, mod)
    result = free_lla(WeightedGenerators.parse(gens), field, c_bound, dim_cap=cap)
    save_lla(out, result.lla, comment=f"free c={c_bound} on {gens}")
    labels_path = out + ".labels"
    with open(labels_path, "w") as fh:
        for idx, label in enumerate(result.labels):
            fh.write(f"{idx + 1} {label}\n")
    report(
        {"result": {"dim": result.lla.n, "out": out, "labels": labels_path}},
        as_json,
        f"dim {result.lla.n}, written to {out} (labels: {labels_path})",
    )


# ---------------------------------------------------------------------------
# .emb files


def write_emb(path: str, source_lla_path: str, blocks) -> None:
    lines = [f"lla {source_lla_path}"]
    for target_name, rows, field in blocks:
        lines.append(f"into {target_name}")
        for row in rows:
            lines.append(" ".join(field.format(x) for x in row))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_emb(path: str):
    """Returns (source .lla path, [(target name, row strings)])."""
    src = None
    blocks: list = []
    with open(path) as fh:
        for raw in fh:
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if line.startswith("lla "):
                src = line[4:].strip()
            elif line.startswith("into "):
                blocks.append((line[5:].strip(), []))
            else:
                if not blocks:
                    raise click.UsageError(f"{path}: row before any 'into' header")
                blocks[-1][1].append(line.split())
    if src is None:
        raise click.UsageError(f"{path}: missing 'lla' header naming the source algebra")
    return src, blocks


@main.command()
@click.argument("a_path", type=click.Path(exists=True))
@click.argument("b_path", type=click.Path(exists=True))
@click.option("--over", "emb_path", type=click.Path(exists=True), required=True)
@click.option("--out", type=click.Path(), default="amalgam.lla")
@click.option("--cap", type=int, default=64)
@click.option("--json", "as_json", is_flag=True)
def amalgamate(a_path, b_path, emb_path, out, cap, as_json):
    """Free amalgam of A and B over the base described by the .emb file."""
    A = load_lla(a_path)
    B = load_lla(b_path)
    src_rel, blocks = read_emb(emb_path)
    c_path = os.path.join(os.path.dirname(emb_path), src_rel)
    C = load_lla(c_path)
    if len(blocks) != 2:
        raise click.UsageError("the .emb file must contain exactly two 'into' blocks")
    names = [os.path.basename(t) for t, _ in blocks]
    if names != [os.path.basename(a_path), os.path.basename(b_path)]:
        raise click.UsageError(
            f"emb blocks target {names}, expected {[os.path.basename(a_path), os.path.basename(b_path)]}"
        )

    def morphism_from(rows_text, target: LLA) -> Morphism:
        rows = [[target.field.parse(x) for x in row] for row in rows_text]
        return Morphism(C, target, rows)

    diagram = Span(A, B, C, morphism_from(blocks[0][1], A), morphism_from(blocks[1][1], B))
    try:
        result = free_amalgam(diagram, dim_cap=cap)
    except NilcaError as exc:
        fail(str(exc), as_json)
    save_lla(out, result.S, comment=f"free amalgam of {a_path} and {b_path} over {c_path}")
    base = out[:-4] if out.endswith(".lla") else out
    f1_path, g1_path = base + ".f1.emb", base + ".g1.emb"
    write_emb(f1_path, a_path, [(os.path.basename(out), result.f1.rows, result.S.field)])
    write_emb(g1_path, b_path, [(os.path.basename(out), result.g1.rows, result.S.field)])
    report(
        {"result": {"dim": result.S.n, "out": out, "f1": f1_path, "g1": g1_path}},
        as_json,
        f"amalgam dim {result.S.n}, written to {out} (+ {f1_path}, {g1_path})",
    )


@main.command(name="extend-scalars")
@click.argument("path", type=click.Path(exists=True))
@click.option("--to", "to_spec", required=True, help="e.g. p=2,m=2")
@click.option("--out", type=click.Path(), required=True)
@click.option("--json", "as_json", is_flag=True)
def extend_scalars_cmd(path, to_spec, out, as_json):
    """Extension of scalars along the deterministic least-root embedding."""
    lla = load_lla(path)
    opts = dict(kv.split("=", 1) for kv in to_spec.split(","))
    big = Field(int(opts.get("p", lla.field.p)), int(opts.get("m", 1)))
    try:
        emb = find_embedding(lla.field, big)
        ext = extend_scalars(lla, emb)
    except NilcaError as exc:
        fail(str(exc), as_json)
    save_lla(out, ext.big, comment=f"extension of scalars of {path} to {big}")
    report(
        {"result": {"dim": ext.big.n, "field": str(big), "out": out}},
        as_json,
        f"extended to {big}, dim {ext.big.n}, written to {out}",
    )


# ---------------------------------------------------------------------------
# stages


@main.command(name="generic")
@click.option("--p", type=int, required=True)
@click.option("--m", type=int, default=1)
@click.option("--mod", default=None)
@click.option("--c", "c_bound", type=int, default=2)
@click.option("--rounds", type=int, default=1)
@click.option("--d", "d_bound", type=int, default=2)
@click.option("--e", "e_bound", type=int, default=1)
@click.option("--samples", type=int, default=10)
@click.option("--seed", type=int, default=0)
@click.option("--out", type=click.Path(), default=None, help="write the stage .lla here")
@click.option("--log", "log_path", type=click.Path(), default=None, help="write the replayable log here")
@click.option("--json", "as_json", is_flag=True)
def generic_cmd(p, m, mod, c_bound, rounds, d_bound, e_bound, samples, seed, out, log_path, as_json):
    """Grow a finite stage by saturation rounds at budget (d, e)."""
    field = parse_field_opts(p, m, mod)
    stage = gen.new_stage(field, c_bound, seed)
    reports = []
    for _ in range(rounds):
        stage, rep = gen.fraisse_round(stage, d_bound, e_bound, samples=samples)
        reports.append(rep.to_dict())
    if out:
        save_lla(out, stage.lla, comment=f"stage p={p} c={c_bound} rounds={rounds} d={d_bound} e={e_bound} seed={seed}")
    if log_path:
        with open(log_path, "w") as fh:
            fh.write(gen.stage_to_json(stage))
    complete = all(r["complete"] for r in reports)
    report(
        {"seed": seed, "result": {"dim": stage.lla.n, "rounds": reports, "complete": complete}},
        as_json,
        f"stage dim {stage.lla.n} after {rounds} round(s); " + ("all rounds complete" if complete else "PARTIAL round"),
        seed=seed,
    )
    if not complete:
        sys.exit(1)


@main.command()
@click.argument("log_path", type=click.Path(exists=True))
@click.option("--d", "d_bound", type=int, required=True)
@click.option("--e", "e_bound", type=int, required=True)
@click.option("--samples", type=int, default=10)
@click.option("--anchor", type=click.Choice(["auto", "current"]), default="auto")
@click.option("--strict", is_flag=True, help="exit 1 when the audit reports misses")
@click.option("--json", "as_json", is_flag=True)
def audit(log_path, d_bound, e_bound, samples, anchor, strict, as_json):
    """Audit the extension property of a logged stage."""
    with open(log_path) as fh:
        stage = gen.stage_from_json(fh.read())
    rep = gen.audit_extension_property(stage, d_bound, e_bound, samples=samples, anchor=anchor)
    report(
        {"seed": stage.seed, "result": rep.to_dict()},
        as_json,
        f"copies {rep.copies}, demands {rep.demands_checked}, misses {len(rep.misses)}",
        seed=stage.seed,
    )
    if strict and rep.misses:
        sys.exit(1)


@main.command()
@click.argument("a_path", type=click.Path(exists=True))
@click.argument("b_path", type=click.Path(exists=True))
@click.option("--ignore-filtration", is_flag=True)
@click.option("--json", "as_json", is_flag=True)
def isocheck(a_path, b_path, ignore_filtration, as_json):
    """Search for an isomorphism; exit 1 when none exists."""
    from .iso import iso_search

    A, B = load_lla(a_path), load_lla(b_path)
    hom = iso_search(A, B, respect_filtration=not ignore_filtration)
    if hom is None:
        report({"result": {"isomorphic": False}}, as_json, "not isomorphic")
        sys.exit(1)
    rows = [[A.field.format(x) for x in row] for row in hom.rows]
    report(
        {"result": {"isomorphic": True, "matrix": rows}},
        as_json,
        "isomorphic; basis images:\n" + "\n".join(" ".join(r) for r in rows),
    )


@main.command(name="enumerate")
@click.option("--p", type=int, required=True)
@click.option("--c", "c_bound", type=int, default=2)
@click.option("--dim", "max_dim", type=int, required=True)
@click.option("--out", type=click.Path(), required=True)
@click.option("--json", "as_json", is_flag=True)
def enumerate_cmd(p, c_bound, max_dim, out, as_json):
    """Catalog of isomorphism classes up to the documented budgets."""
    from .iso import enumerate_catalog

    field = Field(p)
    try:
        catalog = enumerate_catalog(field, c_bound, max_dim)
    except NilcaError as exc:
        fail(str(exc), as_json)
    os.makedirs(out, exist_ok=True)
    summary = {"p": p, "c": c_bound, "max_dim": max_dim, "dims": {}}
    for n in range(1, max_dim + 1):
        infos = []
        for idx, entry in enumerate(catalog.entries(n)):
            name = f"dim{n}_class{idx}.lla"
            save_lla(os.path.join(out, name), entry.lla, comment=f"catalog rep {n}/{idx}")
            infos.append({"file": name, "tables": entry.table_count, "aut": entry.aut_count})
        summary["dims"][str(n)] = {
            "valid_tables": catalog.valid_counts[n],
            "classes": infos,
        }
    with open(os.path.join(out, "catalog.json"), "w") as fh:
        json.dump({"schema": JSON_SCHEMA, "version": __version__, **summary}, fh, indent=1)
    human = "; ".join(
        f"dim {n}: {len(catalog.entries(n))} classes / {catalog.valid_counts[n]} tables"
        for n in range(1, max_dim + 1)
    )
    report({"result": summary}, as_json, human)


@main.command(name="bnf-audit")
@click.argument("a_log", type=click.Path(exists=True))
@click.argument("b_log", type=click.Path(exists=True))
@click.option("--depth", type=int, default=2)
@click.option("--games", type=int, default=20)
@click.option("--seed", type=int, default=0)
@click.option("--strict", is_flag=True, help="exit 1 on any failed game")
@click.option("--json", "as_json", is_flag=True)
def bnf_audit(a_log, b_log, depth, games, seed, strict, as_json):
    """Back-and-forth games between two logged stages.

    Exit 1 when a failure cannot be traced to a confirmed extension gap
    (or, with --strict, on any failure at all)."""
    from .iso import back_and_forth_audit

    with open(a_log) as fh:
        A = gen.stage_from_json(fh.read())
    with open(b_log) as fh:
        B = gen.stage_from_json(fh.read())
    rep = back_and_forth_audit(A, B, depth, games=games, seed=seed)
    report(
        {"seed": seed, "result": rep.to_dict()},
        as_json,
        f"completed {rep.completed}/{rep.games} games at depth {depth}; "
        f"{len(rep.failures)} failures, {len(rep.unexplained)} unexplained",
        seed=seed,
    )
    if rep.unexplained or (strict and rep.failures):
        sys.exit(1)


@main.command(name="prop-suite")
@click.option("--seed", type=int, default=0)
@click.option("--count", type=int, default=100)
@click.option("--max-dim", type=int, default=4)
@click.option("--json", "as_json", is_flag=True)
def prop_suite(seed, count, max_dim, as_json):
    """Run the independence-relation axiom suite; exit 1 on counterexamples."""
    rep = independence_axiom_suite(seed, count=count, max_dim=max_dim)
    human = "\n".join(
        f"{name}: {o.passed}/{o.attempted}" for name, o in rep.outcomes.items()
    )
    report({"seed": seed, "result": rep.to_dict()}, as_json, human, seed=seed)
    if not rep.clean:
        sys.exit(1)


if __name__ == "__main__":
    main()
