import sys
from pathlib import Path

import pytest

TESTS_DIR = Path(__file__).resolve().parent
sys.path.insert(0, str(TESTS_DIR))  # makes `oracles` importable

TOY_DIR = TESTS_DIR / "fixtures" / "toy"
CORPUS_DIR = TESTS_DIR / "fixtures" / "corpus"


@pytest.fixture(scope="session")
def toy_dir() -> Path:
    return TOY_DIR


@pytest.fixture(scope="session")
def corpus_dir() -> Path:
    return CORPUS_DIR


@pytest.fixture(scope="session")
def toy_vocab():
    from dnaug.vocab import load_icd

    return load_icd(TOY_DIR / "icd.tsv")


@pytest.fixture(scope="session")
def toy_lexicons():
    from dnaug.vocab import load_axis_lexicons

    return load_axis_lexicons(
        TOY_DIR / "centers.txt", TOY_DIR / "regions.txt", TOY_DIR / "characteristics.txt"
    )


@pytest.fixture(scope="session")
def toy_tree():
    from dnaug.vocab import load_region_tree

    return load_region_tree(TOY_DIR / "region_tree.tsv")


@pytest.fixture(scope="session")
def toy_task_pairs():
    from dnaug.vocab import load_task_pairs

    return load_task_pairs(TOY_DIR / "task_pairs.tsv")


@pytest.fixture(scope="session")
def toy_index(toy_vocab, toy_lexicons, toy_task_pairs):
    from dnaug.augment import TaggedIndex
    from dnaug.tagging import LexiconTagger
    from dnaug.vocab import tagged_terms_needed

    tagger = LexiconTagger(toy_lexicons)
    return TaggedIndex.build(tagged_terms_needed(toy_vocab, toy_task_pairs), tagger)
