from __future__ import annotations

import importlib.resources
from pathlib import Path

import numpy as np
import pytest

from lodcoverage.features import FeatureMatrix, VariableSpec
from lodcoverage.langcatalog import Catalog, Languoid


@pytest.fixture(scope="session")
def data_dir() -> Path:
    return Path(str(importlib.resources.files("lodcoverage"))) / "data"


def make_matrix(points, languages=None, variables=None, mask=None) -> FeatureMatrix:
    """Wrap raw coordinates in a FeatureMatrix for metric/cluster tests."""
    values = np.asarray(points, dtype=np.float64)
    if values.ndim == 1:
        values = values[:, None]
    n, d = values.shape
    if languages is None:
        languages = [f"l{i:03d}" for i in range(n)]
    if variables is None:
        variables = [
            VariableSpec(name=f"v{j}", source_id="src", field="entity_count",
                         transform="identity")
            for j in range(d)
        ]
    if mask is None:
        mask = np.zeros(n, dtype=bool)
    return FeatureMatrix(tuple(languages), tuple(variables), values, mask)


def make_languoid(code, family="F", genus="G", macroarea="M", features=None,
                  name=None, iso=None) -> Languoid:
    return Languoid(
        wals_code=code,
        name=name or code.capitalize(),
        family=family,
        genus=genus,
        macroarea=macroarea,
        iso639_3=iso,
        features=features or {},
    )


def romance_fixture_catalog() -> Catalog:
    """Neapolitan, Ladino, and two non-Romance-genus languages."""
    return Catalog([
        make_languoid("nap", family="Indo-European", genus="Romance",
                      macroarea="Eurasia", features={"81A": "1"}),
        make_languoid("lad", family="Indo-European", genus="Romance",
                      macroarea="Eurasia", features={"81A": "1"}),
        make_languoid("deu", family="Indo-European", genus="Germanic",
                      macroarea="Eurasia", features={"81A": "2"}),
        make_languoid("jpn", family="Japanese", genus="Japanese",
                      macroarea="Eurasia", features={"81A": "3"}),
    ])
