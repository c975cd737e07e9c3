"""Command-line surface: ingestion, certification pipeline, report emission.

Commands: subsample (build hash-bagging membership), certify (one budget),
sweep (budget grid to CSV), bound (tolerable-budget cover), oracle
(brute-force cross-check). Exit codes: 0 ok, 2 bad input, 3 instance too
large for an exhaustive method, 4 cross-check mismatch.
"""

from __future__ import annotations

import csv
import functools
import json
import math
import sys
from dataclasses import dataclass
from typing import Optional, Sequence, TextIO

import click

from .bound import UNCOVERABLE, tolerable_budget_exact, tolerable_budget_greedy
from .core import Budget, Certificate, InstanceTooLargeError, VoteMatrix, relative_gap
from .decompose import GroupReport, certify_decomposed_report
from .hash_bagging import Membership, PairStructure, records_from_lines, subsample
from .oracle import brute_force_p1, brute_force_p2
from .solver import DEFAULT_TIME_PER_SAMPLE, Structure, certify

EXIT_INPUT = 2
EXIT_TOO_LARGE = 3
EXIT_MISMATCH = 4

DEFAULT_GRID = tuple(round(0.05 * k, 2) for k in range(1, 11))  # 5% .. 50%

METHOD_SAMPLEWISE = "SampleWise"
METHOD_COLLECTIVE = "Collective"
METHOD_DECOMPOSED = "Decomposed"
_MODE_TO_METHOD = {
    "samplewise": METHOD_SAMPLEWISE,
    "collective": METHOD_COLLECTIVE,
    "decomposed": METHOD_DECOMPOSED,
}


@dataclass(frozen=True)
class ReportRow:
    """One sweep result: a (budget fraction, method) cell of the report table."""

    budget_fraction: float
    method: str
    cr: int
    ca: Optional[int]
    alpha: Optional[float]  # None when not applicable, NaN when division by zero
    status: str
    seconds: float


def _friendly_errors(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except InstanceTooLargeError as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(EXIT_TOO_LARGE)
        except (ValueError, OSError, json.JSONDecodeError) as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(EXIT_INPUT)

    return wrapper


def read_votes_csv(path: str, header: bool = False) -> list[list[int]]:
    """Headerless CSV of M rows x G integer class indices."""
    rows: list[list[int]] = []
    with open(path, newline="") as fp:
        reader = csv.reader(fp)
        for lineno, row in enumerate(reader):
            if header and lineno == 0:
                continue
            if not row or (len(row) == 1 and row[0].strip() == ""):
                continue
            try:
                rows.append([int(cell) for cell in row])
            except ValueError:
                raise ValueError(f"{path}:{lineno + 1}: votes must be integers")
    widths = {len(r) for r in rows}
    if len(widths) > 1:
        raise ValueError(f"{path}: rows have differing widths {sorted(widths)}")
    return rows


def read_labels_csv(path: str) -> list[int]:
    """One integer class label per line."""
    labels: list[int] = []
    with open(path, newline="") as fp:
        for lineno, row in enumerate(csv.reader(fp)):
            if not row or (len(row) == 1 and row[0].strip() == ""):
                continue
            if len(row) != 1:
                raise ValueError(f"{path}:{lineno + 1}: expected one label per line")
            try:
                labels.append(int(row[0]))
            except ValueError:
                raise ValueError(f"{path}:{lineno + 1}: labels must be integers")
    return labels


def build_vote_matrix(
    rows: Sequence[Sequence[int]],
    num_classes: Optional[int] = None,
    labels: Optional[Sequence[int]] = None,
    num_classifiers: Optional[int] = None,
) -> VoteMatrix:
    """Vote matrix with a sound class-count default.

    Unless --classes is given, C is max(votes, labels) + 1 but never below 2:
    pretending a one-class problem has no rival would certify flippable rows
    as safe.
    """
    observed = max(
        max((v for row in rows for v in row), default=-1),
        max(labels, default=-1) if labels is not None else -1,
    )
    if num_classes is None:
        num_classes = max(observed + 1, 2)
    elif observed >= num_classes:
        raise ValueError(f"--classes {num_classes} but class index {observed} appears")
    if not rows:
        g = num_classifiers or 0
        return VoteMatrix(
            num_classifiers=g,
            num_samples=0,
            num_classes=num_classes,
            votes=(),
            counts=(),
            predictions=(),
        )
    return VoteMatrix.from_votes(rows, num_classes=num_classes)


def load_structure(
    membership_path: Optional[str],
    pairs: Optional[int],
    num_classifiers: int,
) -> Structure:
    """Membership file, or a bare pair layout from the pair count."""
    if (membership_path is None) == (pairs is None):
        raise ValueError("exactly one of --membership and --pairs is required")
    if membership_path is not None:
        with open(membership_path) as fp:
            membership = Membership.from_json(fp.read())
        if membership.num_classifiers != num_classifiers:
            raise ValueError(
                f"membership is for G={membership.num_classifiers}, "
                f"votes have G={num_classifiers}"
            )
        return membership
    if pairs < 1:
        raise ValueError("--pairs must be >= 1")
    if num_classifiers < 1:
        raise ValueError("--pairs needs at least one classifier column")
    g_hat = -(-num_classifiers // pairs)
    structure = PairStructure.for_counts(num_classifiers, g_hat)
    if structure.num_pairs != pairs:
        raise ValueError(
            f"no pair layout with exactly {pairs} pairs exists for G={num_classifiers}"
        )
    return structure


def resolve_budget(
    num_classifiers: int,
    r_ins: Optional[int],
    r_del: Optional[int],
    r_mod: Optional[int],
    r_ins_frac: Optional[float],
    r_del_frac: Optional[float],
    r_mod_frac: Optional[float],
) -> Budget:
    """Absolute counts, or fractions of G rounded down."""

    def resolve(name: str, count: Optional[int], frac: Optional[float]) -> int:
        if count is not None and frac is not None:
            raise ValueError(f"give either --{name} or --{name}-frac, not both")
        if frac is not None:
            if frac < 0:
                raise ValueError(f"--{name}-frac must be >= 0")
            return int(frac * num_classifiers)
        return count or 0

    return Budget(
        r_ins=resolve("r-ins", r_ins, r_ins_frac),
        r_del=resolve("r-del", r_del, r_del_frac),
        r_mod=resolve("r-mod", r_mod, r_mod_frac),
    )


def budget_for_fraction(structure: Structure, num_classifiers: int, fraction: float) -> Budget:
    """Sweep knob: r = floor(fraction * G) insertions for pair structures,
    modifications for bare memberships (their only certifiable budget)."""
    r = int(fraction * num_classifiers)
    hash_based = isinstance(structure, PairStructure) or structure.pair_structure is not None
    return Budget(r_ins=r) if hash_based else Budget(r_mod=r)


def sweep_rows(
    votes: VoteMatrix,
    structure: Structure,
    fractions: Sequence[float],
    modes: Sequence[str],
    delta: int = 1,
    labels: Optional[Sequence[int]] = None,
    time_per_sample: float = DEFAULT_TIME_PER_SAMPLE,
    threads: int = 1,
) -> list[ReportRow]:
    """Certificates across a budget grid, one row per (fraction, method).

    alpha on collective/decomposed rows compares that method's attack bound
    with the same-fraction sample-wise attack count.
    """
    unknown = [m for m in modes if m not in _MODE_TO_METHOD]
    if unknown:
        raise ValueError(f"unknown mode(s): {', '.join(unknown)}")
    ordered_modes = [m for m in ("samplewise", "collective", "decomposed") if m in modes]
    rows: list[ReportRow] = []
    for fraction in sorted(set(fractions)):
        budget = budget_for_fraction(structure, votes.num_classifiers, fraction)
        sw_cert, _ = certify_decomposed_report(
            votes,
            structure,
            budget,
            delta=1,
            labels=labels,
            time_per_sample=time_per_sample,
            threads=threads,
        )
        m_sam_atk = sw_cert.attacked_ub
        for mode in ordered_modes:
            if mode == "samplewise":
                cert: Certificate = sw_cert
                alpha = None
            else:
                if mode == "collective":
                    cert = certify(
                        votes,
                        structure,
                        budget,
                        labels=labels,
                        time_per_sample=time_per_sample,
                    )
                else:
                    cert, _ = certify_decomposed_report(
                        votes,
                        structure,
                        budget,
                        delta=delta,
                        labels=labels,
                        time_per_sample=time_per_sample,
                        threads=threads,
                    )
                # a truncated collective bound can exceed the sample-wise count;
                # the gap is meaningless then, so leave it blank
                alpha = (
                    relative_gap(m_sam_atk, cert.attacked_ub)
                    if cert.attacked_ub <= m_sam_atk
                    else None
                )
            rows.append(
                ReportRow(
                    budget_fraction=fraction,
                    method=_MODE_TO_METHOD[mode],
                    cr=cert.collective_robustness_lb,
                    ca=cert.certified_accuracy,
                    alpha=alpha,
                    status=cert.status.value,
                    seconds=cert.solve_seconds,
                )
            )
    return rows


def write_sweep_csv(rows: Sequence[ReportRow], fp: TextIO) -> None:
    writer = csv.writer(fp, lineterminator="\n")
    writer.writerow(["budget_fraction", "method", "cr", "ca", "alpha", "status", "seconds"])
    for row in rows:
        if row.alpha is None:
            alpha = ""
        elif math.isnan(row.alpha):
            alpha = "NaN"
        else:
            alpha = format(row.alpha, ".6f")
        writer.writerow(
            [
                format(row.budget_fraction, ".6g"),
                row.method,
                row.cr,
                "" if row.ca is None else row.ca,
                alpha,
                row.status,
                format(row.seconds, ".6f"),
            ]
        )


def _certificate_json(
    cert: Certificate,
    votes: VoteMatrix,
    mode: str,
    delta: Optional[int],
    groups: Optional[Sequence[GroupReport]],
) -> dict:
    out = {
        "mode": mode,
        "num_samples": votes.num_samples,
        "num_classifiers": votes.num_classifiers,
        "num_classes": votes.num_classes,
    }
    if delta is not None:
        out["delta"] = delta
    out.update(cert.to_json_dict())
    if groups is not None:
        out["groups"] = [
            {
                "rows": list(rep.rows),
                "omega_size": rep.omega_size,
                "attacked_ub": rep.upper_bound,
                "attacked_incumbent": rep.incumbent,
                "exact": rep.exact,
                "seconds": rep.seconds,
            }
            for rep in groups
        ]
    return out


def _emit(text: str, out_path: Optional[str]) -> None:
    if out_path is None:
        click.echo(text, nl=False)
    else:
        with open(out_path, "w") as fp:
            fp.write(text)


def _structure_options(fn):
    fn = click.option("--membership", "membership_path", type=str, default=None,
                      help="Membership JSON file.")(fn)
    fn = click.option("--pairs", type=int, default=None,
                      help="Number of trainset-hash pairs (instead of a membership file).")(fn)
    return fn


def _votes_options(fn):
    fn = click.option("--header", is_flag=True, help="Skip one CSV header line.")(fn)
    fn = click.option("--classes", type=int, default=None,
                      help="Total class count (default: inferred, at least 2).")(fn)
    return fn


def _budget_options(fn):
    for name in ("r-mod", "r-del", "r-ins"):
        attr = name.replace("-", "_")
        fn = click.option(f"--{name}-frac", f"{attr}_frac", type=float, default=None,
                          help=f"{attr} as a fraction of G (floor).")(fn)
        fn = click.option(f"--{name}", attr, type=int, default=None,
                          help=f"Absolute {attr}.")(fn)
    return fn


@click.group()
@click.option(
    "--threads",
    type=int,
    default=1,
    envvar="POISON_CERT_THREADS",
    show_default=True,
    help="Worker threads for independent sub-problems.",
)
@click.pass_context
def cli(ctx: click.Context, threads: int) -> None:
    """Collective-robustness certification for bagged ensembles."""
    ctx.ensure_object(dict)
    ctx.obj["threads"] = max(1, threads)


@cli.command("subsample")
@click.argument("dataset_path", type=click.Path(exists=True, dir_okay=False))
@click.option("-G", "--classifiers", "num_classifiers", type=int, required=True,
              help="Number of sub-trainsets to build.")
@click.option("-K", "--subsample-size", type=int, required=True,
              help="Target sub-trainset size.")
@click.option("-o", "--out", "out_path", type=str, required=True,
              help="Where to write the membership JSON.")
@_friendly_errors
def cmd_subsample(dataset_path: str, num_classifiers: int, subsample_size: int, out_path: str) -> None:
    """Hash one-sample-per-line DATASET_PATH into sub-trainset membership."""
    with open(dataset_path, "rb") as fp:
        records = records_from_lines(fp.read())
    membership = subsample(records, num_classifiers, subsample_size)
    with open(out_path, "w") as fp:
        fp.write(membership.to_json())
    ps = membership.pair_structure
    sizes = [0] * num_classifiers
    for s in membership.sets:
        for g in s:
            sizes[g] += 1
    click.echo(f"samples={len(records)} G={num_classifiers} g_hat={ps.g_hat} num_pairs={ps.num_pairs}")
    click.echo(f"sub-trainset sizes: min={min(sizes)} max={max(sizes)}")
    click.echo(f"wrote {out_path}")


@cli.command("certify")
@click.argument("votes_path", type=click.Path(exists=True, dir_okay=False))
@_structure_options
@_votes_options
@_budget_options
@click.option("--mode", type=click.Choice(["samplewise", "collective", "decomposed"]),
              default="collective", show_default=True)
@click.option("--delta", type=int, default=1, show_default=True,
              help="Sub-testset size for --mode decomposed.")
@click.option("--time-per-sample", type=float, default=DEFAULT_TIME_PER_SAMPLE,
              show_default=True, help="Solve seconds granted per target row.")
@click.option("--labels", "labels_path", type=click.Path(exists=True, dir_okay=False),
              default=None, help="Ground-truth labels CSV for certified accuracy.")
@click.option("-o", "--out", "out_path", type=str, default=None,
              help="Write certificate JSON here instead of stdout.")
@click.pass_context
@_friendly_errors
def cmd_certify(
    ctx: click.Context,
    votes_path: str,
    membership_path: Optional[str],
    pairs: Optional[int],
    header: bool,
    classes: Optional[int],
    r_ins: Optional[int],
    r_del: Optional[int],
    r_mod: Optional[int],
    r_ins_frac: Optional[float],
    r_del_frac: Optional[float],
    r_mod_frac: Optional[float],
    mode: str,
    delta: int,
    time_per_sample: float,
    labels_path: Optional[str],
    out_path: Optional[str],
) -> None:
    """Certify VOTES_PATH (CSV of M rows x G class indices) under one budget."""
    threads = ctx.obj["threads"]
    raw = read_votes_csv(votes_path, header=header)
    labels = read_labels_csv(labels_path) if labels_path else None
    votes = build_vote_matrix(raw, num_classes=classes, labels=labels)
    structure = load_structure(membership_path, pairs, votes.num_classifiers)
    budget = resolve_budget(
        votes.num_classifiers, r_ins, r_del, r_mod, r_ins_frac, r_del_frac, r_mod_frac
    )
    groups: Optional[tuple[GroupReport, ...]] = None
    used_delta: Optional[int] = None
    if mode == "collective":
        cert = certify(
            votes, structure, budget, labels=labels, time_per_sample=time_per_sample
        )
    else:
        used_delta = 1 if mode == "samplewise" else delta
        cert, groups = certify_decomposed_report(
            votes,
            structure,
            budget,
            delta=used_delta,
            labels=labels,
            time_per_sample=time_per_sample,
            threads=threads,
        )
    payload = _certificate_json(cert, votes, mode, used_delta, groups)
    _emit(json.dumps(payload, sort_keys=True, indent=2) + "\n", out_path)


@cli.command("sweep")
@click.argument("votes_path", type=click.Path(exists=True, dir_okay=False))
@_structure_options
@_votes_options
@click.option("--grid", type=str, default=",".join(str(f) for f in DEFAULT_GRID),
              show_default=True, help="Comma-separated budget fractions of G.")
@click.option("--modes", type=str, default="samplewise,collective", show_default=True,
              help="Comma-separated subset of samplewise,collective,decomposed.")
@click.option("--delta", type=int, default=1, show_default=True,
              help="Sub-testset size for the decomposed mode.")
@click.option("--time-per-sample", type=float, default=DEFAULT_TIME_PER_SAMPLE,
              show_default=True)
@click.option("--labels", "labels_path", type=click.Path(exists=True, dir_okay=False),
              default=None)
@click.option("-o", "--out", "out_path", type=str, default=None,
              help="Write the CSV here instead of stdout.")
@click.pass_context
@_friendly_errors
def cmd_sweep(
    ctx: click.Context,
    votes_path: str,
    membership_path: Optional[str],
    pairs: Optional[int],
    header: bool,
    classes: Optional[int],
    grid: str,
    modes: str,
    delta: int,
    time_per_sample: float,
    labels_path: Optional[str],
    out_path: Optional[str],
) -> None:
    """Certify VOTES_PATH across a budget grid and emit a CSV report."""
    threads = ctx.obj["threads"]
    raw = read_votes_csv(votes_path, header=header)
    labels = read_labels_csv(labels_path) if labels_path else None
    votes = build_vote_matrix(raw, num_classes=classes, labels=labels)
    structure = load_structure(membership_path, pairs, votes.num_classifiers)
    try:
        fractions = [float(tok) for tok in grid.split(",") if tok.strip()]
    except ValueError:
        raise ValueError(f"bad --grid value: {grid!r}")
    mode_list = [tok.strip() for tok in modes.split(",") if tok.strip()]
    rows = sweep_rows(
        votes,
        structure,
        fractions,
        mode_list,
        delta=delta,
        labels=labels,
        time_per_sample=time_per_sample,
        threads=threads,
    )
    if out_path is None:
        write_sweep_csv(rows, sys.stdout)
    else:
        with open(out_path, "w", newline="") as fp:
            write_sweep_csv(rows, fp)


@cli.command("bound")
@click.argument("membership_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--exact/--greedy", "exact", default=True,
              help="Exact minimum cover, or the greedy upper bound.")
@click.option("--max-patterns", type=int, default=30, show_default=True,
              help="Exact-search cap on distinct influence patterns.")
@_friendly_errors
def cmd_bound(membership_path: str, exact: bool, max_patterns: int) -> None:
    """Smallest number of training samples whose scopes cover a classifier majority."""
    with open(membership_path) as fp:
        membership = Membership.from_json(fp.read())
    try:
        if exact:
            result = tolerable_budget_exact(membership, max_patterns=max_patterns)
            value, kind = result.r_bar, "r_bar"
        else:
            result = tolerable_budget_greedy(membership)
            value, kind = result.r_bar_upper, "r_bar_upper"
    except InstanceTooLargeError as exc:
        raise InstanceTooLargeError(f"{exc}; or rerun with --greedy")
    if value == UNCOVERABLE:
        click.echo(f"{kind}=inf (no sample set covers a classifier majority)")
    else:
        click.echo(f"{kind}={value}")
        click.echo(f"witness_samples={list(result.witness)}")


@cli.command("oracle")
@click.argument("votes_path", type=click.Path(exists=True, dir_okay=False))
@_structure_options
@_votes_options
@_budget_options
@click.option("--cross-check", is_flag=True,
              help="Also run the certifier and fail on disagreement.")
@click.option("--time-per-sample", type=float, default=DEFAULT_TIME_PER_SAMPLE,
              show_default=True, help="Certifier time budget for --cross-check.")
@_friendly_errors
def cmd_oracle(
    votes_path: str,
    membership_path: Optional[str],
    pairs: Optional[int],
    header: bool,
    classes: Optional[int],
    r_ins: Optional[int],
    r_del: Optional[int],
    r_mod: Optional[int],
    r_ins_frac: Optional[float],
    r_del_frac: Optional[float],
    r_mod_frac: Optional[float],
    cross_check: bool,
    time_per_sample: float,
) -> None:
    """Exact attack optimum by brute force (small instances only)."""
    raw = read_votes_csv(votes_path, header=header)
    votes = build_vote_matrix(raw, num_classes=classes)
    structure = load_structure(membership_path, pairs, votes.num_classifiers)
    budget = resolve_budget(
        votes.num_classifiers, r_ins, r_del, r_mod, r_ins_frac, r_del_frac, r_mod_frac
    )
    if isinstance(structure, PairStructure):
        best, witness = brute_force_p2(votes, structure, budget, return_witness=True)
        witness_kind = "witness_classifiers"
    elif structure.pair_structure is not None:
        best, witness = brute_force_p2(
            votes, structure.pair_structure, budget, return_witness=True
        )
        witness_kind = "witness_classifiers"
    else:
        if budget.r_ins or budget.r_del:
            raise ValueError(
                "insertions/deletions are only certifiable for hash-pair memberships"
            )
        best, witness = brute_force_p1(votes, structure, budget.r_mod, return_witness=True)
        witness_kind = "witness_samples"
    click.echo(f"oracle_max_changed={best}")
    click.echo(f"{witness_kind}={list(witness)}")
    if cross_check:
        cert = certify(votes, structure, budget, time_per_sample=time_per_sample)
        if cert.status.value == "Exact":
            ok = cert.attacked_ub == best
        else:  # truncated run: the bounds must still bracket the truth
            ok = cert.attacked_incumbent <= best <= cert.attacked_ub
        if not ok:
            click.echo(
                f"cross-check MISMATCH: certifier [{cert.attacked_incumbent}, "
                f"{cert.attacked_ub}] ({cert.status.value}) vs oracle {best}",
                err=True,
            )
            sys.exit(EXIT_MISMATCH)
        click.echo(
            f"cross-check ok: certifier bound {cert.attacked_ub} ({cert.status.value})"
        )


main = cli

if __name__ == "__main__":
    main()
