"""Plain-text model files.

A file is a list of ``[section]`` blocks of tab-separated records::

    [marginal]
    N	117
    member	0.35897435897435898	ANIMAL	BIRD	swallow

Cut members are written as root-to-node label paths so that files stay
readable; numbers use 17 significant digits and read back bit-exactly.
"""

from __future__ import annotations

import math
from typing import Iterable, Optional

from .atcm import AssociationTreeCutModel, TreeCutPairModel, stochastic_residual
from .corpus import HeadKey
from .taxonomy import Taxonomy, TreeCut
from .tcm import TreeCutModel


class ModelFormatError(ValueError):
    pass


def fmt(x: float) -> str:
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".17g")


def _member_lines(t: Taxonomy, cut: TreeCut, values: Iterable[float]) -> list[str]:
    return ["\t".join(["member", fmt(x), *t.path(v)]) for v, x in zip(cut, values)]


def _tcm_lines(m: TreeCutModel) -> list[str]:
    lines = []
    if m.n is not None:
        lines.append(f"N\t{m.n}")
    return lines + _member_lines(m.taxonomy, m.cut, m.q)


def _atcm_lines(m: AssociationTreeCutModel) -> list[str]:
    lines = []
    if m.key is not None:
        lines += [f"head\t{m.key.head}", f"slot\t{m.key.slot}"]
    lines.append(f"size\t{m.size}")
    return lines + _member_lines(m.taxonomy, m.cut, m.a)


def dump_tcm(m: TreeCutModel) -> str:
    return "\n".join(["[marginal]", *_tcm_lines(m)]) + "\n"


def dump_atcm(m: AssociationTreeCutModel) -> str:
    return "\n".join(["[assoc]", *_atcm_lines(m)]) + "\n"


def dump_pair(pm: TreeCutPairModel, extra: Optional[dict[str, str]] = None) -> str:
    lines = ["[assoc]", *_atcm_lines(pm.assoc), "[marginal]", *_tcm_lines(pm.marginal)]
    lines += ["[pair]", f"residual\t{fmt(stochastic_residual(pm))}"]
    for k, v in (extra or {}).items():
        lines.append(f"{k}\t{v}")
    return "\n".join(lines) + "\n"


def parse_sections(text: str) -> dict[str, list[list[str]]]:
    sections: dict[str, list[list[str]]] = {}
    current: Optional[list[list[str]]] = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.rstrip("\r")
        if not line.strip() or line.startswith("#"):
            continue
        if line.startswith("[") and line.endswith("]"):
            current = sections.setdefault(line[1:-1], [])
            continue
        if current is None:
            raise ModelFormatError(f"line {lineno}: record outside any section")
        current.append(line.split("\t"))
    return sections


def _members(t: Taxonomy, records: list[list[str]]) -> tuple[TreeCut, tuple[float, ...]]:
    nodes, values = [], []
    for rec in records:
        if rec[0] != "member":
            continue
        if len(rec) < 3:
            raise ModelFormatError(f"bad member record {rec!r}")
        values.append(float(rec[1]))
        try:
            nodes.append(t.resolve_path(rec[2:]))
        except KeyError as exc:
            raise ModelFormatError(str(exc)) from None
    cut = TreeCut(tuple(nodes))
    t.cut(nodes)  # validates
    return cut, tuple(values)


def _fields(records: list[list[str]]) -> dict[str, str]:
    return {r[0]: r[1] for r in records if r[0] != "member" and len(r) >= 2}


def _load_tcm(t: Taxonomy, records: list[list[str]]) -> TreeCutModel:
    cut, q = _members(t, records)
    f = _fields(records)
    return TreeCutModel(t, cut, q, int(f["N"]) if "N" in f else None)


def _load_atcm(t: Taxonomy, records: list[list[str]]) -> AssociationTreeCutModel:
    cut, a = _members(t, records)
    f = _fields(records)
    key = HeadKey(f["head"], f["slot"]) if "head" in f and "slot" in f else None
    return AssociationTreeCutModel(t, cut, a, key, int(f.get("size", 0)))


def _section(sections: dict, name: str) -> list[list[str]]:
    try:
        return sections[name]
    except KeyError:
        raise ModelFormatError(f"missing [{name}] section") from None


def load_tcm(t: Taxonomy, text: str) -> TreeCutModel:
    return _load_tcm(t, _section(parse_sections(text), "marginal"))


def load_atcm(t: Taxonomy, text: str) -> AssociationTreeCutModel:
    return _load_atcm(t, _section(parse_sections(text), "assoc"))


def load_pair(t: Taxonomy, text: str) -> TreeCutPairModel:
    sections = parse_sections(text)
    return TreeCutPairModel(
        _load_atcm(t, _section(sections, "assoc")), _load_tcm(t, _section(sections, "marginal"))
    )


def pair_extras(text: str) -> dict[str, str]:
    """Key/value records of the ``[pair]`` section (residual, seed, ...)."""
    return _fields(parse_sections(text).get("pair", []))
