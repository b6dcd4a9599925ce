from pathlib import Path

import pytest

from meroval import mapping, ontology
from meroval.lexicon import Corpus
from meroval.pipeline import Pipeline
from meroval.workspace import Workspace

FIXTURES = Path(__file__).resolve().parent.parent / "src" / "meroval" / "fixtures"
DATASETS = Path(__file__).resolve().parent.parent / "src" / "meroval" / "datasets"

# the bundled corpus is small enough that 8 descendants marks the
# basic-level band (tree), matching the correction fixtures
MIN_DESCENDANTS = 8


def fixture_text(*parts) -> str:
    return (FIXTURES.joinpath(*parts)).read_text(encoding="utf-8")


@pytest.fixture(scope="session")
def data_text():
    return fixture_text("wordnet", "data.noun")


@pytest.fixture(scope="session")
def index_text():
    return fixture_text("wordnet", "index.noun")


@pytest.fixture(scope="session")
def ontology_text():
    return fixture_text("ontology", "base.kif")


@pytest.fixture(scope="session")
def mapping_text():
    return fixture_text("wordnet", "annotated.noun")


@pytest.fixture(scope="session")
def corpus(data_text, index_text):
    return Corpus.from_texts(data_text, index_text)


@pytest.fixture()
def base_ontology(ontology_text):
    return ontology.parse_ontology(ontology_text)


@pytest.fixture()
def table(mapping_text, corpus):
    return mapping.MappingTable.ingest(
        mapping.parse_mapping(mapping_text, corpus))


@pytest.fixture()
def make_pipeline(tmp_path, data_text, index_text, ontology_text,
                  mapping_text):
    """Factory for ingested pipelines on throwaway workspaces."""
    counter = [0]

    def make(provers=None, min_descendants=MIN_DESCENDANTS):
        counter[0] += 1
        ws = Workspace.create(str(tmp_path / f"ws{counter[0]}"))
        pipe = Pipeline(ws, provers=provers)
        pipe.ingest(data_text, index_text, ontology_text, mapping_text,
                    min_descendants=min_descendants)
        return pipe

    return make
