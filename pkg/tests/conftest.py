import sys
from pathlib import Path

import pytest

TESTS_DIR = Path(__file__).resolve().parent
sys.path.insert(0, str(TESTS_DIR))

DATA_DIR = TESTS_DIR / "data"

# fixtures that parse cleanly and exercise the tokenization pipeline
CORPUS_PDBS = [
    "mini_helix.pdb",
    "helix18.pdb",
    "helix310.pdb",
    "pihelix.pdb",
    "hairpin.pdb",
    "bridge.pdb",
    "meander.pdb",
    "mixed.pdb",
    "coil.pdb",
    "afstyle.pdb",
    "gapped.pdb",
    "incomplete.pdb",
]

# the secondary-structure reference set scored against the oracle
REFERENCE_SET = ["helix18.pdb", "hairpin.pdb", "meander.pdb", "mixed.pdb", "coil.pdb"]


@pytest.fixture(scope="session")
def data_dir() -> Path:
    return DATA_DIR


@pytest.fixture(scope="session")
def corpus_chains(data_dir):
    """name -> ExtractedChain for every parsable corpus fixture."""
    from protforge.structparse import extract_chain, parse_pdb

    chains = {}
    for name in CORPUS_PDBS:
        model = parse_pdb((data_dir / name).read_text())
        chains[name] = extract_chain(model)
    return chains


@pytest.fixture(scope="session")
def mock_server():
    from mockserver import MockDatabankServer

    server = MockDatabankServer()
    yield server
    server.close()
