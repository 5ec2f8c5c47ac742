import pytest
from pathlib import Path

from debatemap.corpus import build_corpus, load_overrides
from debatemap.topicmodel import LdaConfig, fit_lda

FIXTURES = Path(__file__).parent / "fixtures"
PROTOCOLS = FIXTURES / "protocols"
BAD = FIXTURES / "bad"
OVERRIDES = FIXTURES / "overrides.txt"
STOPWORDS = FIXTURES / "stopwords.txt"


@pytest.fixture(scope="session")
def fixture_corpus():
    """The 12 handcrafted protocols, parsed once per session."""
    files = sorted(PROTOCOLS.glob("*.txt"))
    corpus, report = build_corpus(files, load_overrides(OVERRIDES))
    return corpus, report


@pytest.fixture(scope="session")
def planted():
    """(matrix, theta, phi) of the standard 3-topic planted corpus, seed 0."""
    from planted import planted_matrix

    return planted_matrix(seed=0)


@pytest.fixture(scope="session")
def planted_model(planted):
    dtm, _, _ = planted
    return fit_lda(dtm, LdaConfig(k=3, iterations=1000, burn_in=200, seed=2017))
