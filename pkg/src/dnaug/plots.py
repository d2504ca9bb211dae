"""Figure rendering for evaluation reports and dataset summaries.

matplotlib is imported lazily with the Agg backend so CLI runs never need a
display.
"""

from pathlib import Path

from .vocab import NormPair, Provenance


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def render_eval_curves(
    rows: list[dict],
    path: str | Path,
    k: int = 5,
) -> Path:
    """Recall@k and NDCG@k against training fraction, one line per
    condition (with / without augmentation); zero-shot points are drawn as
    markers at fraction 0."""
    plt = _pyplot()
    fig, axes = plt.subplots(1, 2, figsize=(9, 3.6), sharex=True)
    metrics = [("recall_at_5", f"Recall@{k}"), ("ndcg_at_5", f"NDCG@{k}")]
    styles = {True: ("tab:blue", "with augmentation"), False: ("tab:red", "without augmentation")}
    for axis, (key, title) in zip(axes, metrics):
        for flag, (color, label) in styles.items():
            series = sorted(
                (r["fraction"], r[key]) for r in rows if r["with_augmentation"] is flag and r["fraction"] > 0
            )
            if series:
                axis.plot(*zip(*series), marker="o", color=color, label=label)
            zero = [r[key] for r in rows if r["with_augmentation"] is flag and r["fraction"] == 0]
            if zero:
                axis.scatter([0.0], zero, marker="*", s=120, color=color, zorder=3, label="zero-shot")
        axis.set_xlabel("training fraction")
        axis.set_ylabel(title)
        axis.set_ylim(0.0, 1.05)
        axis.grid(True, alpha=0.3)
    axes[0].legend(fontsize=8)
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def render_dataset_stats(pairs: list[NormPair], path: str | Path) -> Path:
    """Provenance counts plus score histograms for a dataset file."""
    plt = _pyplot()
    fig, (left, right) = plt.subplots(1, 2, figsize=(9, 3.6))

    counts = {p.value: 0 for p in Provenance}
    for pair in pairs:
        counts[pair.provenance.value] += 1
    names = [n for n in counts if counts[n]]
    left.bar(names, [counts[n] for n in names], color="tab:blue")
    left.set_ylabel("pairs")
    left.tick_params(axis="x", rotation=30)
    left.set_title("pairs by provenance")

    ngm_values = [p.ngm for p in pairs if p.ngm is not None]
    cos_values = [p.cos for p in pairs if p.cos is not None]
    if ngm_values:
        right.hist(ngm_values, bins=24, alpha=0.6, label="ngm", color="tab:green")
    if cos_values:
        right.hist(cos_values, bins=24, alpha=0.6, label="cosine", color="tab:orange")
    right.set_title("filter scores (kept pairs)")
    if ngm_values or cos_values:
        right.legend(fontsize=8)
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
