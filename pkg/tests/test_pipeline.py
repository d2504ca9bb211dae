import json

import pytest

from dnaug.pipeline import (
    ConfigError,
    PipelineConfig,
    dedupe,
    load_config_file,
    parse_axes,
    parse_methods,
    read_dataset,
    run,
    write_dataset,
)
from dnaug.terms import TermText
from dnaug.vocab import NormPair, Provenance


def pair(u, s, provenance=Provenance.ORIGINAL, code=None, ngm=None, cos=None):
    return NormPair(TermText(u), TermText(s), code, provenance, ngm, cos)


class TestDedupe:
    def test_priority_order(self):
        merged = dedupe(
            [pair("a1", "b1", Provenance.MGA_CODE), pair("a1", "b1", Provenance.AR1)]
        )
        assert len(merged) == 1
        assert merged[0].provenance is Provenance.AR1

    def test_no_duplicates_identity(self):
        pairs = [pair("a1", "b1", Provenance.AR1), pair("a2", "b2", Provenance.AR2)]
        assert dedupe(pairs) == sorted(pairs, key=lambda p: p.provenance.value)

    def test_generated_duplicate_of_original_removed(self):
        pairs = [
            pair("左肺癌", "肺恶性肿瘤", Provenance.ORIGINAL),
            pair("左肺癌", "肺恶性肿瘤", Provenance.AR2),
            pair("左肝癌", "肝恶性肿瘤", Provenance.AR2),
        ]
        merged = dedupe(pairs)
        assert len(merged) == len(pairs) - 1
        by_key = {p.key(): p.provenance for p in merged}
        assert by_key[("左肺癌", "肺恶性肿瘤")] is Provenance.ORIGINAL


class TestDatasetIo:
    def test_empty_file(self, tmp_path):
        path = tmp_path / "empty.jsonl"
        write_dataset([], path)
        assert path.read_text(encoding="utf-8") == ""
        assert read_dataset(path) == []

    @pytest.mark.parametrize("fmt", ["jsonl", "tsv"])
    def test_one_pair_round_trip(self, tmp_path, fmt):
        original = pair("左肺癌", "肺恶性肿瘤", Provenance.AR2, code="C34.9", ngm=1.5, cos=0.925)
        path = tmp_path / f"data.{fmt}"
        write_dataset([original], path, format=fmt)
        assert read_dataset(path) == [original]

    def test_five_pairs_sorted_and_stable(self, tmp_path):
        pairs = sorted(
            [
                pair("b", "x", Provenance.AR1),
                pair("a", "x", Provenance.AR1),
                pair("a", "x", Provenance.MGA_CODE),
                pair("c", "y", Provenance.AR2),
                pair("a", "y", Provenance.ORIGINAL),
            ],
            key=lambda p: (p.provenance.value, p.unnormalized.raw, p.standard.raw),
        )
        path_one, path_two = tmp_path / "one.tsv", tmp_path / "two.tsv"
        write_dataset(pairs, path_one, format="tsv")
        write_dataset(pairs, path_two, format="tsv")
        assert path_one.read_bytes() == path_two.read_bytes()
        lines = path_one.read_text(encoding="utf-8").splitlines()
        assert len(lines) == 5
        provs = [line.split("\t")[3] for line in lines]
        assert provs == sorted(provs)

    def test_unicode_written_verbatim(self, tmp_path):
        path = tmp_path / "data.jsonl"
        write_dataset([pair("腹股沟淋巴结结核", "下肢淋巴结结核")], path)
        assert "腹股沟" in path.read_text(encoding="utf-8")


class TestConfig:
    def test_parse_methods(self):
        methods = parse_methods("ar1,mga-code")
        assert methods == frozenset({Provenance.AR1, Provenance.MGA_CODE})
        with pytest.raises(ConfigError):
            parse_methods("ar1,bogus")

    def test_parse_axes(self):
        assert len(parse_axes("center,region,characteristic")) == 3
        with pytest.raises(ConfigError):
            parse_axes("sideways")

    def test_load_config_file(self, toy_dir):
        cfg = load_config_file(toy_dir / "config.ini")
        assert cfg.alpha == 0.7
        assert cfg.beta == 0.8
        assert len(cfg.methods) == 4
        assert cfg.icd_path.endswith("icd.tsv")

    def test_missing_required_keys(self, tmp_path):
        path = tmp_path / "bad.ini"
        path.write_text("[inputs]\nicd = x.tsv\n", encoding="utf-8")
        with pytest.raises(ConfigError):
            load_config_file(path)

    def test_validate_catches_missing_lexicons(self):
        cfg = PipelineConfig(icd_path="icd.tsv", task_pairs_path="pairs.tsv")
        with pytest.raises(ConfigError):
            cfg.validate()


def toy_config(toy_dir, out_dir, **overrides):
    cfg = load_config_file(toy_dir / "config.ini")
    cfg.output_dir = str(out_dir)
    for key, value in overrides.items():
        setattr(cfg, key, value)
    return cfg


# The toy fixture is small enough to enumerate by hand.  From the three seed
# pairs, AR2 rewrites the region of the two seeds whose standard's region
# occurs in the unnormalized side, once per sibling (9 each); AR1 candidates
# all collapse into self-pairs; MGA-Code pairs the A18.2 parent with its ten
# children but every pair fails the cosine gate; the single MGA-Region pair
# fails it too.
TOY_EXPECTED_AR2 = {
    ("左腹股沟淋巴结结核", "腹股沟淋巴结结核"),
    ("左颌下淋巴结结核", "颌下淋巴结结核"),
    ("左下肢淋巴结结核", "下肢淋巴结结核"),
    ("左腋下淋巴结结核", "腋下淋巴结结核"),
    ("左肺门淋巴结结核", "肺门淋巴结结核"),
    ("左纵隔淋巴结结核", "纵隔淋巴结结核"),
    ("左肠系膜淋巴结结核", "肠系膜淋巴结结核"),
    ("左腹膜后淋巴结结核", "腹膜后淋巴结结核"),
    ("左锁骨上淋巴结结核", "锁骨上淋巴结结核"),
    ("腹股沟淋巴结结核待查", "腹股沟淋巴结结核"),
    ("颌下淋巴结结核待查", "颌下淋巴结结核"),
    ("颈淋巴结结核待查", "颈淋巴结结核"),
    ("腋下淋巴结结核待查", "腋下淋巴结结核"),
    ("肺门淋巴结结核待查", "肺门淋巴结结核"),
    ("纵隔淋巴结结核待查", "纵隔淋巴结结核"),
    ("肠系膜淋巴结结核待查", "肠系膜淋巴结结核"),
    ("腹膜后淋巴结结核待查", "腹膜后淋巴结结核"),
    ("锁骨上淋巴结结核待查", "锁骨上淋巴结结核"),
}


class TestRun:
    def test_toy_fixture_matches_hand_enumeration(self, toy_dir, tmp_path):
        result = run(toy_config(toy_dir, tmp_path))
        augmented = {p.key() for p in result.pairs if p.provenance is not Provenance.ORIGINAL}
        assert augmented == TOY_EXPECTED_AR2
        stats = result.stats.per_provenance
        assert stats["ar1"].generated == 0
        assert stats["ar2"].generated == 18 and stats["ar2"].kept == 18
        assert stats["mga-code"].generated == 10 and stats["mga-code"].kept == 0
        assert stats["mga-code"].dropped == {"low_cosine": 10}
        assert stats["mga-region"].generated == 1 and stats["mga-region"].kept == 0
        assert stats["original"].kept == 3
        result.stats.check_conservation()

    def test_all_methods_disabled_yields_originals_only(self, toy_dir, tmp_path):
        cfg = toy_config(toy_dir, tmp_path, methods=frozenset())
        result = run(cfg)
        assert all(p.provenance is Provenance.ORIGINAL for p in result.pairs)
        assert len(result.pairs) == 3
        assert read_dataset(result.augmented_path) == []

    def test_rerun_byte_identical(self, toy_dir, tmp_path):
        first = run(toy_config(toy_dir, tmp_path / "one"))
        second = run(toy_config(toy_dir, tmp_path / "two"))
        assert first.augmented_path.read_bytes() == second.augmented_path.read_bytes()
        assert first.original_path.read_bytes() == second.original_path.read_bytes()

    def test_output_never_contains_empty_sides(self, toy_dir, tmp_path):
        result = run(toy_config(toy_dir, tmp_path))
        for p in result.pairs:
            assert p.unnormalized.length >= 1
            assert p.standard.length >= 1

    def test_missing_input_aborts_with_diagnostic(self, toy_dir, tmp_path):
        cfg = toy_config(toy_dir, tmp_path, icd_path=str(tmp_path / "absent.tsv"))
        with pytest.raises(Exception, match="absent.tsv"):
            run(cfg)

    def test_stats_json_written(self, toy_dir, tmp_path):
        result = run(toy_config(toy_dir, tmp_path))
        payload = json.loads(result.stats_path.read_text(encoding="utf-8"))
        assert payload["ar2"]["kept"] == 18
        assert "wall_time_seconds" in payload

    def test_workers_do_not_change_output(self, toy_dir, tmp_path):
        serial = run(toy_config(toy_dir, tmp_path / "serial", workers=1))
        parallel = run(toy_config(toy_dir, tmp_path / "parallel", workers=2))
        assert serial.augmented_path.read_bytes() == parallel.augmented_path.read_bytes()

    def test_pretagged_file_replaces_lexicon_tagger(self, toy_dir, tmp_path):
        # spans exported from the lexicon tagger, fed back through the
        # pre-tagged interface, must reproduce the run exactly
        from dnaug.augment import TaggedIndex
        from dnaug.tagging import LexiconTagger
        from dnaug.vocab import load_axis_lexicons, load_icd, load_task_pairs, tagged_terms_needed

        vocab = load_icd(toy_dir / "icd.tsv")
        task = load_task_pairs(toy_dir / "task_pairs.tsv")
        lexicons = load_axis_lexicons(
            toy_dir / "centers.txt", toy_dir / "regions.txt", toy_dir / "characteristics.txt"
        )
        index = TaggedIndex.build(tagged_terms_needed(vocab, task), LexiconTagger(lexicons))
        pretagged = tmp_path / "pretagged.jsonl"
        with open(pretagged, "w", encoding="utf-8") as handle:
            for raw, tagged in index.tags.items():
                spans = [
                    {"start": s.start, "end": s.end, "label": s.label.value}
                    for s in tagged.spans
                ]
                handle.write(json.dumps({"term": raw, "spans": spans}, ensure_ascii=False) + "\n")

        with_lexicons = run(toy_config(toy_dir, tmp_path / "lex"))
        via_file = run(
            toy_config(
                toy_dir,
                tmp_path / "pre",
                pretagged_path=str(pretagged),
                centers_path=None,
                regions_path=None,
                characteristics_path=None,
            )
        )
        assert with_lexicons.augmented_path.read_bytes() == via_file.augmented_path.read_bytes()

    def test_embedding_file_drives_filter(self, toy_dir, tmp_path):
        # cover only two terms: every generated pair except the covered one
        # drops with reason embedding_unavailable
        vectors = tmp_path / "vectors.tsv"
        vectors.write_text(
            "左颌下淋巴结结核\t1.0,0.0\n颌下淋巴结结核\t1.0,0.0\n", encoding="utf-8"
        )
        result = run(toy_config(toy_dir, tmp_path, embedding_path=str(vectors)))
        stats = result.stats.per_provenance["ar2"]
        assert stats.kept == 1
        assert stats.dropped["embedding_unavailable"] == 17
        kept = [p for p in result.pairs if p.provenance is Provenance.AR2]
        assert kept[0].cos == pytest.approx(1.0)
