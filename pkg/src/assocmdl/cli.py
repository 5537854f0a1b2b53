"""Command line entry point: ``assocmdl fit | eval | verify``.

Log verbosity comes from the ``ASSOCMDL_LOG`` environment variable
(``WARNING`` by default).
"""

from __future__ import annotations

import logging
import os
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional
from urllib.parse import quote, unquote

import click
import numpy as np
from sklearn.model_selection import KFold

from .atcm import DEFAULT_EPSILON, EstimationError
from .corpus import HeadKey, ingest_triples, preprocess_word, read_quadruples
from .disambiguation import break_even, coverage_accuracy_curve, evaluate, format_curve, format_table
from .modelio import dump_pair, dump_tcm, load_pair, load_tcm
from .pipeline import METHODS, FittedModels, decide_all, fit_models
from .taxonomy import Taxonomy, load_taxonomy

log = logging.getLogger("assocmdl")

DEFAULT_THRESHOLDS = "inf,16,8,4,2,1,0.5,0.25,0"


@dataclass(frozen=True)
class RunConfig:
    taxonomy: Optional[Path] = None
    triples: Optional[Path] = None
    quads: Optional[Path] = None
    slots: tuple[str, ...] = ()
    epsilon: Optional[float] = None
    thresholds: tuple[float, ...] = ()
    seed: int = 0
    out: Path = Path("out")
    folds: int = 10
    models: Optional[Path] = None
    preprocess: bool = True
    jobs: int = 1

    def __post_init__(self):
        for p in (self.taxonomy, self.triples, self.quads):
            if p is not None and not Path(p).exists():
                raise click.UsageError(f"no such file: {p}")
        if any(b > a for a, b in zip(self.thresholds, self.thresholds[1:])):
            raise click.UsageError("--thresholds must be in descending order")


def _setup_logging() -> None:
    level = os.environ.get("ASSOCMDL_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)


def _normalizer(cfg: RunConfig):
    return preprocess_word if cfg.preprocess else None


def _read_sample(cfg: RunConfig, t: Taxonomy):
    with open(cfg.triples, encoding="utf-8") as fh:
        sample = ingest_triples(fh, t, _normalizer(cfg))
    if cfg.slots:
        keep = set(cfg.slots)
        sample = type(sample)({k: c for k, c in sample.counts.items() if k[1].slot in keep},
                              sample.unknown)
    return sample


def _name(s: str) -> str:
    return quote(s, safe="")


def save_models(fitted: FittedModels, out: Path) -> list[Path]:
    written = []

    def write(path: Path, text: str) -> None:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
        written.append(path)

    for slot in sorted(fitted.marginals):
        write(out / _name(slot) / "marginal.tcm", dump_tcm(fitted.marginals[slot]))
    for key in sorted(fitted.pairs):
        base = out / _name(key.slot)
        write(base / f"{_name(key.head)}.atcm", dump_pair(fitted.pairs[key]))
        write(base / "conditional" / f"{_name(key.head)}.tcm", dump_tcm(fitted.conditionals[key]))
    return written


def load_models(t: Taxonomy, directory: Path) -> FittedModels:
    if not directory.is_dir():
        raise click.ClickException(f"missing models: {directory} is not a directory (run `fit` first)")
    fitted = FittedModels()
    for slot_dir in sorted(p for p in directory.iterdir() if p.is_dir()):
        slot = unquote(slot_dir.name)
        marginal = slot_dir / "marginal.tcm"
        if not marginal.exists():
            continue
        fitted.marginals[slot] = load_tcm(t, marginal.read_text(encoding="utf-8"))
        for f in sorted(slot_dir.glob("*.atcm")):
            key = HeadKey(unquote(f.stem), slot)
            fitted.pairs[key] = load_pair(t, f.read_text(encoding="utf-8"))
            cond = slot_dir / "conditional" / f"{f.stem}.tcm"
            if cond.exists():
                fitted.conditionals[key] = load_tcm(t, cond.read_text(encoding="utf-8"))
    if not fitted.marginals:
        raise click.ClickException(f"missing models: no fitted slot under {directory}")
    return fitted


def cmd_fit(cfg: RunConfig) -> list[Path]:
    t = load_taxonomy(cfg.taxonomy)
    sample = _read_sample(cfg, t)
    if sample.unknown:
        log.warning("%d value words are not in the taxonomy and are ignored", len(sample.unknown))
    fitted = fit_models(t, sample, cfg.slots or None, cfg.epsilon, cfg.jobs)
    written = save_models(fitted, cfg.out)
    summary = ["slot\thead\tsize\tassoc_cut\tconditional_cut"]
    for key, pm in sorted(fitted.pairs.items()):
        summary.append(f"{key.slot}\t{key.head}\t{pm.assoc.size}\t{len(pm.assoc.cut)}\t{len(fitted.conditionals[key].cut)}")
    (cfg.out / "fit_summary.tsv").write_text("\n".join(summary) + "\n", encoding="utf-8")
    return written


def fold_indices(n: int, folds: int, seed: int) -> list[np.ndarray]:
    """Test indices of each fold after a seeded shuffle; sizes differ by at most 1."""
    if n == 0:
        return []
    k = max(1, min(folds, n))
    if k == 1:
        return [np.arange(n)]
    return [test for _, test in KFold(k, shuffle=True, random_state=seed).split(np.arange(n))]


def cmd_eval(cfg: RunConfig) -> dict[str, Path]:
    t = load_taxonomy(cfg.taxonomy)
    fitted = load_models(t, cfg.models or cfg.out)
    sample = _read_sample(cfg, t)
    with open(cfg.quads, encoding="utf-8") as fh:
        quads = read_quadruples(fh, _normalizer(cfg))
    if cfg.slots:
        quads = [q for q in quads if q.prep in set(cfg.slots)]
    scored = decide_all(t, quads, fitted, sample)
    cfg.out.mkdir(parents=True, exist_ok=True)
    outputs: dict[str, Path] = {}

    fold_lines = ["fold\tmethod\tn\tcoverage\taccuracy"]
    per_method: dict[str, list] = {m: [] for m in METHODS}
    for i, idx in enumerate(fold_indices(len(quads), cfg.folds, cfg.seed)):
        for m in METHODS:
            rep = evaluate(scored[m][j] for j in idx)
            per_method[m].append(rep)
            acc = "NA" if rep.accuracy is None else f"{rep.accuracy:.2f}"
            fold_lines.append(f"{i}\t{m}\t{rep.n_test}\t{rep.coverage:.2f}\t{acc}")
    outputs["folds"] = cfg.out / "folds.tsv"
    outputs["folds"].write_text("\n".join(fold_lines) + "\n", encoding="utf-8")

    table = {}
    for m in METHODS:
        reps = per_method[m]
        accs = [r.accuracy for r in reps if r.accuracy is not None]
        pooled = evaluate(scored[m])
        table[m] = type(pooled)(
            float(np.mean([r.coverage for r in reps])) if reps else 0.0,
            float(np.mean(accs)) if accs else None,
            pooled.n_test,
        )
    outputs["table"] = cfg.out / "table.tsv"
    outputs["table"].write_text(format_table(table), encoding="utf-8")

    be_lines = ["method\tbreak_even"]
    for m in ("MDL", "SA", "Assoc"):
        curve = coverage_accuracy_curve(scored[m], list(cfg.thresholds))
        path = cfg.out / f"curve_{m}.tsv"
        path.write_text(format_curve(curve), encoding="utf-8")
        outputs[f"curve_{m}"] = path
        be = break_even(curve)
        be_lines.append(f"{m}\t{'NA' if be is None else f'{be:.6f}'}")
    outputs["break_even"] = cfg.out / "break_even.tsv"
    outputs["break_even"].write_text("\n".join(be_lines) + "\n", encoding="utf-8")
    return outputs


def _parse_thresholds(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise click.BadParameter(f"not a comma-separated list of numbers: {text!r}") from None


def _epsilon(value: Optional[str]) -> Optional[float]:
    if value is None or value.lower() == "off":
        return None
    if value.lower() == "on":
        return DEFAULT_EPSILON
    return float(value)


_common = [
    click.option("--taxonomy", type=click.Path(dir_okay=False), required=True, help="Taxonomy file (s-expression or JSON)."),
    click.option("--slot", "slots", multiple=True, help="Restrict to these slots (repeatable)."),
    click.option("--epsilon", default=None, help="Floor on marginal class probabilities: off, on or a value."),
    click.option("--seed", default=0, show_default=True, type=int),
    click.option("--out", type=click.Path(file_okay=False), default="out", show_default=True),
    click.option("--no-preprocess", is_flag=True, help="Do not normalize numerals and years."),
]


def common(f):
    for opt in reversed(_common):
        f = opt(f)
    return f


@click.group()
def main():
    """Association norms over a thesaurus by two-step MDL estimation."""
    _setup_logging()


@main.command("fit")
@common
@click.option("--triples", type=click.Path(dir_okay=False), required=True)
@click.option("--jobs", default=1, show_default=True, type=int, help="Worker threads for head fitting.")
def fit_command(taxonomy, slots, epsilon, seed, out, no_preprocess, triples, jobs):
    """Fit marginals and association models; write model files."""
    cfg = RunConfig(Path(taxonomy), Path(triples), None, tuple(slots), _epsilon(epsilon),
                    seed=seed, out=Path(out), preprocess=not no_preprocess, jobs=jobs)
    try:
        written = cmd_fit(cfg)
    except EstimationError as exc:
        raise click.ClickException(str(exc)) from None
    click.echo(f"wrote {len(written)} model files under {cfg.out}")


@main.command("eval")
@common
@click.option("--triples", type=click.Path(dir_okay=False), required=True)
@click.option("--quads", type=click.Path(dir_okay=False), required=True)
@click.option("--models", type=click.Path(file_okay=False), default=None, help="Model directory (default: --out).")
@click.option("--thresholds", default=DEFAULT_THRESHOLDS, show_default=True)
@click.option("--folds", default=10, show_default=True, type=int)
def eval_command(taxonomy, slots, epsilon, seed, out, no_preprocess, triples, quads, models, thresholds, folds):
    """Disambiguate quadruples with every method; write the result table and curves."""
    cfg = RunConfig(Path(taxonomy), Path(triples), Path(quads), tuple(slots), _epsilon(epsilon),
                    _parse_thresholds(thresholds), seed, Path(out), folds,
                    Path(models) if models else None, not no_preprocess)
    outputs = cmd_eval(cfg)
    click.echo(outputs["table"].read_text(encoding="utf-8"), nl=False)


@main.command("verify")
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--instances", default=200, show_default=True, type=int)
@click.option("--grid", "grid_count", default=50, show_default=True, type=int)
@click.option("--resolution", default=1e-3, show_default=True, type=float)
@click.option("--cap", default=12, show_default=True, type=int, help="Enumeration cap in leaves.")
@click.option("--mutate", is_flag=True, help="Inject an off-by-one penalty into the fast searches.")
def verify_command(seed, instances, grid_count, resolution, cap, mutate):
    """Check the fast estimators against exhaustive search."""
    from .verify import MAX_LEAVES, run_suite

    if cap < MAX_LEAVES:
        click.echo(f"notice: cap {cap} is below the {MAX_LEAVES}-leaf instances; larger ones are skipped")
    results = run_suite(seed, instances, grid_count, resolution, cap, mutate)
    ok = True
    for r in results:
        click.echo(r.line())
        for dump in r.failures[:5]:
            click.echo(f"    {dump}")
        ok &= r.passed
    sys.exit(0 if ok else 1)


if __name__ == "__main__":
    main()
