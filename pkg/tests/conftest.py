import sys
from datetime import datetime, timezone
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from cropsense.fixtures import reference_candidates, reference_quotas
from cropsense.ingestion import Capture, IngestionService, ReportLabel, ReportStore
from cropsense.registry import Registry, allocate_devices, verify_roster


@pytest.fixture(scope="session")
def reference_roster():
    return verify_roster(reference_candidates(), reference_quotas())


@pytest.fixture(scope="session")
def reference_registry(reference_roster):
    registry = Registry()
    allocation = allocate_devices(reference_roster, reference_quotas())
    registry.load_roster(reference_roster, allocation)
    return registry


@pytest.fixture()
def service(reference_registry):
    return IngestionService(reference_registry, ReportStore())


def make_capture(
    image_ref: str,
    label: ReportLabel = ReportLabel.DISEASE,
    latitude: float = 2.25,
    longitude: float = 32.9,
    comment: str = "",
    captured_at: datetime | None = None,
) -> Capture:
    return Capture(
        captured_at=captured_at or datetime(2018, 4, 17, 9, 0, tzinfo=timezone.utc),
        latitude=latitude,
        longitude=longitude,
        label=label,
        comment=comment,
        image_ref=image_ref,
    )
