import numpy as np
import pytest

from underest import dataset as D


@pytest.fixture
def tiny_schema():
    return D.Schema(
        columns=(("age", "numeric"), ("sex", "categorical"), ("y", "categorical")),
        label_column="y",
        positive_label="1",
        sensitive_column="sex",
        sensitive_minority_value="F",
    )


@pytest.fixture
def tiny_csv(tmp_path):
    path = tmp_path / "tiny.csv"
    path.write_text("y, age ,sex\n1,30,F\n0, 41 ,M\n0,25,M\n1,52,F\n", encoding="utf-8")
    return path


@pytest.fixture(scope="session")
def injected_synthetic():
    base = D.generate_synthetic(600, 4, 0.3, 2.0, seed=1)
    return D.inject_sensitive(base, D.InjectionSpec(0.15, 0.3, seed=2))


def encoded_split(ds, frac=0.5, seed=0):
    tr, te = D.split(ds, D.SplitSpec(frac, seed=seed))
    enc = D.fit_encoding(tr)
    return D.encode(tr, enc), D.encode(te, enc)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
