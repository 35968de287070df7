"""
Tests for replicate stream derivation and the replicate fan-out.
"""

from functools import partial

from app.rng import label_seed, splitmix64, stream, stream_key
from app.services.limit_laws import sample_sup_poisson
from app.services.replicates import _batches, run_replicates


def test_splitmix64_reference_value():
    assert splitmix64(0) == 0xE220A8397B1DCDAF


def test_streams_are_reproducible_and_distinct():
    assert stream(42, 3).random() == stream(42, 3).random()
    assert stream(42, 3).random() != stream(42, 4).random()
    assert stream_key(42, 0) != stream_key(43, 0)


def test_label_seed():
    assert label_seed(42, "a") == label_seed(42, "a")
    assert label_seed(42, "a") != label_seed(42, "b")
    assert 0 <= label_seed(7, "x") < 2**64


def test_batches_cover_every_index_once():
    batches = _batches(10, 3)
    assert [list(b) for b in batches] == [[0, 1, 2, 3], [4, 5, 6], [7, 8, 9]]
    assert _batches(2, 4) == [range(0, 1), range(1, 2)]


def test_results_do_not_depend_on_workers():
    task = partial(sample_sup_poisson, 1.0, 50.0)
    serial = run_replicates(task, 9, seed=5, workers=1)
    parallel = run_replicates(task, 9, seed=5, workers=3)
    assert serial == parallel
    assert serial[4] == task(stream(5, 4))
