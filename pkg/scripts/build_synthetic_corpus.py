#!/usr/bin/env python3
"""Regenerate the committed synthetic evaluation corpus.

The corpus is fully systematic (no randomness): five disease families, each
a center string combined with single-character anatomical regions, a small
region hierarchy (toe/heel/ankle -> foot -> leg, etc.), seed pairs written
in a handful of clinical phrasings, and a held-out query set that mixes

  * easy queries (prefix/suffix variants of diseases seen in training),
  * coarse-region queries for diseases seen only through one seed pair,
  * coarse-region queries for diseases absent from training entirely, and
  * two queries that no index variant can resolve.

Region characters are chosen so that, without augmented surface forms, the
gold standards of the coarse-region queries drown in a lexicographic tie
among sibling diseases; the aggregation methods generate exactly the
surface forms that rescue them.  Run with --check to also assert those
ranking properties after writing the files.
"""

import argparse
import sys
from pathlib import Path

FIXTURE_DIR = Path(__file__).resolve().parent.parent / "tests" / "fixtures" / "corpus"

CENTERS = ["淋巴结结核", "静脉血栓形成", "神经纤维肿瘤", "蜂窝组织感染", "动脉粥样硬化"]
PARENT_CODES = ["A10.1", "A20.2", "B30.1", "C40.5", "D50.3"]

ORGANS = ["肝", "肠", "肺", "胃", "胆", "肾", "脾"]
TRUNK = ["胸", "腹", "背", "腰", "手"]
LIMBS = ["股", "膝", "肘", "腕"]
FOOT = ["趾", "跟", "踝"]
FACE = ["颊", "颌", "颧"]
FINE_REGIONS = ORGANS + TRUNK + LIMBS + FOOT + FACE
COARSE_REGIONS = ["足", "腿", "臂", "面"]

ACUTE_REGIONS = ["趾", "踝", "颊", "颧", "肝", "股"]
CHRONIC_REGIONS = ["肝", "肺", "胃", "肠"]

TREE_EDGES = [
    ("趾", "足"),
    ("跟", "足"),
    ("踝", "足"),
    ("足", "腿"),
    ("股", "腿"),
    ("膝", "腿"),
    ("肘", "臂"),
    ("腕", "臂"),
    ("颊", "面"),
    ("颌", "面"),
    ("颧", "面"),
]


def build_icd() -> list[tuple[str, str]]:
    entries = []
    for i, (center, parent_code) in enumerate(zip(CENTERS, PARENT_CODES), start=1):
        entries.append((parent_code, center))
        child = 0
        for region in FINE_REGIONS:
            child += 1
            entries.append((f"{parent_code}{child:02d}", f"{region}{center}"))
        for region in ACUTE_REGIONS:
            child += 1
            entries.append((f"{parent_code}{child:02d}", f"急性{region}{center}"))
        for region in CHRONIC_REGIONS:
            child += 1
            entries.append((f"{parent_code}{child:02d}", f"慢性{region}{center}"))
        for j, region in enumerate(COARSE_REGIONS, start=1):
            entries.append((f"Z{i}{j}.{i}", f"{region}{center}"))
    return entries


def build_train() -> list[tuple[str, str]]:
    rows = []
    for center in CENTERS:
        for region in ORGANS:
            rows.append((f"左{region}{center}", f"{region}{center}"))
        for region in TRUNK[:4]:
            rows.append((f"右{region}{center}", f"{region}{center}"))
        for region in ["手", "股", "膝", "腕"]:
            rows.append((f"{region}{center}待查", f"{region}{center}"))
        for region in ["肘", "胸"]:
            rows.append((f"双{region}{center}", f"{region}{center}"))
        # coarse-region phrasings: the only seed coverage for heel and jaw
        rows.append((f"左足{center}", f"跟{center}"))
        rows.append((f"左面{center}", f"颌{center}"))
        # one record with two gold standards (fan-out on load)
        rows.append((f"急性肝{center}待查", f"急性肝{center}##肝{center}"))
    return rows


def build_valid() -> list[tuple[str, str]]:
    rows = []
    for center in CENTERS:
        rows.append((f"左肝{center}", f"肝{center}"))  # exact seed repeat
        rows.append((f"右膝{center}", f"膝{center}"))
        rows.append((f"双胆{center}", f"胆{center}"))
        rows.append((f"脾{center}待查", f"脾{center}"))
        rows.append((f"左腰{center}", f"腰{center}"))
        rows.append((f"手{center}复查", f"手{center}"))
        rows.append((f"左足{center}", f"跟{center}"))  # seed phrasing, coarse region
        rows.append((f"左面{center}", f"颌{center}"))
        rows.append((f"双足{center}", f"踝{center}"))  # disease unseen in training
        rows.append((f"面{center}复查", f"颧{center}"))
    rows.append(("背淋巴结结核待诊", "背蜂窝组织感染"))  # unresolvable on purpose
    rows.append(("膝部淋巴结结核可能", "膝静脉血栓形成"))
    return rows


CONFIG = """\
[inputs]
icd = icd.tsv
task_pairs = train.tsv
region_tree = region_tree.tsv
centers = centers.txt
regions = regions.txt
characteristics = characteristics.txt

[augment]
methods = ar1,ar2,mga-code,mga-region
axes = center,region,characteristic
max_pairs_per_source = 20
seed = 0

[filter]
alpha = 0.7
beta = 0.8
ngm_mode = multiset

[output]
dir = out
format = jsonl
"""


def write_fixtures(target: Path) -> None:
    target.mkdir(parents=True, exist_ok=True)

    icd = build_icd()
    codes = [code for code, _ in icd]
    assert len(codes) == len(set(codes)), "duplicate codes"
    (target / "icd.tsv").write_text(
        "".join(f"{code}\t{name}\n" for code, name in icd), encoding="utf-8"
    )
    (target / "region_tree.tsv").write_text(
        "".join(f"{child}\t{parent}\n" for child, parent in TREE_EDGES), encoding="utf-8"
    )
    (target / "centers.txt").write_text("".join(f"{c}\n" for c in CENTERS), encoding="utf-8")
    regions = FINE_REGIONS + COARSE_REGIONS
    (target / "regions.txt").write_text("".join(f"{r}\n" for r in regions), encoding="utf-8")
    (target / "characteristics.txt").write_text("急性\n慢性\n", encoding="utf-8")
    (target / "train.tsv").write_text(
        "".join(f"{u}\t{s}\n" for u, s in build_train()), encoding="utf-8"
    )
    (target / "valid.tsv").write_text(
        "".join(f"{u}\t{s}\n" for u, s in build_valid()), encoding="utf-8"
    )
    (target / "config.ini").write_text(CONFIG, encoding="utf-8")
    print(f"wrote {target}: {len(icd)} vocabulary entries, "
          f"{len(build_train())} train records, {len(build_valid())} valid records")


def check(target: Path) -> None:
    """Assert the ranking properties the corpus was engineered for."""
    import tempfile

    sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))
    from dnaug.evaluate import subsample_experiment
    from dnaug.pipeline import load_config_file, read_dataset, run
    from dnaug.vocab import load_task_pairs

    cfg = load_config_file(target / "config.ini")
    with tempfile.TemporaryDirectory() as scratch:
        cfg.output_dir = scratch
        result = run(cfg)
        print(result.stats.format_table())
        augmented = read_dataset(result.augmented_path)

    train = load_task_pairs(target / "train.tsv")
    valid = load_task_pairs(target / "valid.tsv")
    fractions = [0.05, 0.1, 0.3, 0.5, 1.0]
    base = subsample_experiment(train, valid, fractions, 0, False)
    aug = subsample_experiment(train, valid, fractions, 0, True, augmented)
    print(f"{'fraction':>9} {'base r@5':>9} {'aug r@5':>9}")
    gap_below_03 = False
    for (fraction, b), (_, a) in zip(base, aug):
        print(f"{fraction:>9.2f} {b.recall_at_5:>9.4f} {a.recall_at_5:>9.4f}")
        assert a.recall_at_5 >= b.recall_at_5, f"augmentation hurts at {fraction}"
        if fraction <= 0.3 and a.recall_at_5 > b.recall_at_5:
            gap_below_03 = True
    assert gap_below_03, "no strict gap at small fractions"

    zero = subsample_experiment(train, valid, [0.0], 0, True, augmented)
    print(f"zero-shot recall@5: {zero[0][1].recall_at_5:.4f}")
    assert zero[0][1].recall_at_5 > 0
    print("corpus checks passed")


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", type=Path, default=FIXTURE_DIR)
    parser.add_argument("--check", action="store_true", help="verify ranking properties")
    args = parser.parse_args()
    write_fixtures(args.out)
    if args.check:
        check(args.out)


if __name__ == "__main__":
    main()
