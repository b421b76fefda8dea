import os
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "suite",
    deadline=None,
    max_examples=50,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("suite")

KBOC_ENV = "KEYGAIT_KBOC_DIR"


def kboc_dir() -> Path | None:
    raw = os.environ.get(KBOC_ENV)
    if not raw:
        return None
    path = Path(raw)
    return path if (path / "manifest.tsv").is_file() else None


@pytest.fixture(scope="session")
def small_dataset():
    from keygait import SynthConfig, generate_synthetic

    config = SynthConfig(
        n_subjects=6,
        shift_drop=0.05,
        shift_transpose=0.03,
        capslock_sub=0.02,
        seed=11,
    )
    dataset, _ = generate_synthetic(config)
    return dataset
