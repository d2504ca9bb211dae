"""Independent brute-force reference implementations.

Everything here recomputes expected results from first principles (explicit
substring materialization, transitive-closure expansion, literal rule
enumeration) so the shipped implementations are checked against a second
code path, not against themselves.
"""

import math

from dnaug.augment import TaggedIndex
from dnaug.tagging import AxisLabel, axis_value
from dnaug.vocab import IcdVocabulary, NormPair

AXES = list(AxisLabel)


def brute_ngm(u: str, s: str) -> float:
    """Materialize every substring of both strings; per length, count the
    multiset overlap by merging the two sorted substring lists."""
    m = min(len(u), len(s))
    total = 0
    for n in range(1, m + 1):
        subs_u = sorted(u[i : i + n] for i in range(len(u) - n + 1))
        subs_s = sorted(s[i : i + n] for i in range(len(s) - n + 1))
        i = j = 0
        while i < len(subs_u) and j < len(subs_s):
            if subs_u[i] == subs_s[j]:
                total += 1
                i += 1
                j += 1
            elif subs_u[i] < subs_s[j]:
                i += 1
            else:
                j += 1
    return total / m


def brute_ancestors(edges: list[tuple[str, str]]) -> dict[str, set[str]]:
    """Transitive closure of the child->parent edge list by expansion."""
    direct: dict[str, set[str]] = {}
    for child, parent in edges:
        direct.setdefault(child, set()).add(parent)
    closure = {node: set(parents) for node, parents in direct.items()}
    changed = True
    while changed:
        changed = False
        for node, parents in closure.items():
            extra = set()
            for parent in parents:
                extra |= closure.get(parent, set())
            if not extra <= parents:
                parents |= extra
                changed = True
    return closure


def brute_children(entries: list[tuple[str, str]], code4: str) -> list[str]:
    """Prefix scan: codes of entries under code4, sorted."""
    out = [
        code
        for code, _ in entries
        if code != code4 and code.startswith(code4) and sum(ch.isalnum() for ch in code) > 4
    ]
    return sorted(out)


def _values(idx: TaggedIndex, raw: str) -> dict:
    tagged = idx.tags[raw]
    return {label: axis_value(tagged, label) for label in AXES}


def brute_ar1(vocab: IcdVocabulary, idx: TaggedIndex, axes) -> set[tuple]:
    """Literal AR1 rule over all ordered name pairs, no caps."""
    out = set()
    for a in vocab.entries:
        va = _values(idx, a.name.raw)
        for b in vocab.entries:
            if a.name.raw == b.name.raw:
                continue
            vb = _values(idx, b.name.raw)
            shared = any(va[l] is not None and va[l] == vb[l] for l in AXES)
            if not shared:
                continue
            for axis2 in AXES:
                if axis2 not in axes:
                    continue
                if va[axis2] is None or vb[axis2] is None or va[axis2] == vb[axis2]:
                    continue
                span = next(s for s in idx.tags[a.name.raw].spans if s.label is axis2)
                new_name = a.name.raw[: span.start] + vb[axis2] + a.name.raw[span.end :]
                if new_name == b.name.raw:
                    continue
                if any(c != b.code for c in vocab.codes_for_name(new_name)):
                    continue
                out.add((new_name, b.name.raw, b.code))
    return out


def brute_ar2(task_pairs, vocab: IcdVocabulary, idx: TaggedIndex, axes) -> set[tuple]:
    out = set()
    for pair in task_pairs:
        u, s = pair.unnormalized.raw, pair.standard.raw
        vs = _values(idx, s)
        for c in vocab.entries:
            vc = _values(idx, c.name.raw)
            if not any(vs[l] is not None and vs[l] == vc[l] for l in AXES):
                continue
            for axis2 in AXES:
                if axis2 not in axes:
                    continue
                if vs[axis2] is None or vc[axis2] is None or vs[axis2] == vc[axis2]:
                    continue
                position = u.find(vs[axis2])
                if position == -1:
                    continue
                new_u = u[:position] + vc[axis2] + u[position + len(vs[axis2]) :]
                if new_u == c.name.raw:
                    continue
                out.add((new_u, c.name.raw, c.code))
    return out


def brute_mga_code(entries: list[tuple[str, str]]) -> set[tuple]:
    """(code, name) rows -> expected pairs by explicit prefix scan."""
    out = set()
    for code4, parent_name in entries:
        if sum(ch.isalnum() for ch in code4) > 4:
            continue
        for code, name in entries:
            if code != code4 and code.startswith(code4) and sum(c.isalnum() for c in code) > 4:
                if parent_name != name:
                    out.add((parent_name, name, code))
    return out


def brute_mga_region(vocab: IcdVocabulary, idx: TaggedIndex, edges) -> set[tuple]:
    closure = brute_ancestors(edges)
    out = set()
    for x in vocab.entries:
        vx = _values(idx, x.name.raw)
        for y in vocab.entries:
            if x.name.raw == y.name.raw:
                continue
            vy = _values(idx, y.name.raw)
            if vx[AxisLabel.CENTER] is None or vx[AxisLabel.CENTER] != vy[AxisLabel.CENTER]:
                continue
            rx, ry = vx[AxisLabel.REGION], vy[AxisLabel.REGION]
            if rx is None or ry is None:
                continue
            if ry in closure.get(rx, set()):
                out.add((y.name.raw, x.name.raw, x.code))
    return out


def pair_set(pairs: list[NormPair]) -> set[tuple]:
    return {(p.unnormalized.raw, p.standard.raw, p.standard_code) for p in pairs}


def brute_rank(query: str, surfaces: dict[str, set[str]], k: int) -> list[str]:
    scored = []
    for standard, forms in surfaces.items():
        best = max(brute_ngm(query, f) for f in forms)
        scored.append((standard, best))
    scored.sort(key=lambda item: (-item[1], item[0]))
    return [name for name, _ in scored[:k]]


def brute_ndcg(gold: set[str], names: list[str], k: int) -> float:
    dcg = 0.0
    for i, name in enumerate(names[:k], start=1):
        if name in gold:
            dcg += 1.0 / math.log2(i + 1)
    ideal = sum(1.0 / math.log2(i + 1) for i in range(1, min(len(gold), k) + 1))
    return dcg / ideal
