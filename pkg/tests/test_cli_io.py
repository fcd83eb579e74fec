import csv
import json

import numpy as np
import pytest
from filelock import FileLock

from lvaluelab import cli_io
from lvaluelab.cli_io import (CacheConflict, cache_roundtrip, load_or_sample, main,
                              read_samples_npz, write_samples_npz)
from lvaluelab.critline_eval import ENVELOPE_VERSION, SampleSet, sample_line


def _same(a, b):
    assert a.fingerprint == b.fingerprint
    assert a.tup.canonical() == b.tup.canonical()
    assert (a.T, a.N, a.seed, a.envelope_version) == (b.T, b.N, b.seed, b.envelope_version)
    assert np.array_equal(a.t, b.t)
    assert np.array_equal(a.logf, b.logf)
    assert np.array_equal(a.quality, b.quality)


@pytest.fixture(scope="module")
def small_samples(pair_tuple_module):
    return sample_line(pair_tuple_module, 1e3, 1000, 5)


@pytest.fixture(scope="module")
def pair_tuple_module():
    from lvaluelab.lfunc_registry import make_dirichlet, make_tuple, make_zeta
    return make_tuple([make_zeta(), make_dirichlet(4, 1)], [0.0, 0.0])


def test_roundtrip_empty(tmp_path, pair_tuple):
    empty = SampleSet(pair_tuple, 1e3, 0, 1, np.zeros(0), np.zeros((0, 2), complex),
                      np.zeros(0, np.int8), ENVELOPE_VERSION)
    for fmt in ("npz", "csv"):
        back = cache_roundtrip(empty, tmp_path / fmt, fmt)
        _same(empty, back)


def test_roundtrip_thousand(tmp_path, small_samples):
    _same(small_samples, cache_roundtrip(small_samples, tmp_path, "npz"))
    back = cache_roundtrip(small_samples, tmp_path, "csv")
    assert np.max(np.abs(back.logf - small_samples.logf)) <= 1e-15
    assert np.array_equal(back.t, small_samples.t)


def test_tampered_header_rejected(tmp_path, small_samples):
    path = tmp_path / "s.npz"
    write_samples_npz(small_samples, path)
    with np.load(path) as d:
        parts = {k: d[k] for k in d.files}
    header = json.loads(str(parts["header"]))
    header["seed"] += 1
    parts["header"] = np.array(json.dumps(header))
    np.savez(path, **parts)
    with pytest.raises(CacheConflict):
        read_samples_npz(path)

    # consistent header but altered data
    write_samples_npz(small_samples, path)
    with np.load(path) as d:
        parts = {k: d[k] for k in d.files}
    parts["logf"] = parts["logf"] * 1.0000001
    np.savez(path, **parts)
    with pytest.raises(CacheConflict):
        read_samples_npz(path)

    write_samples_npz(small_samples, path)
    with pytest.raises(CacheConflict):
        read_samples_npz(path, expected_fingerprint="0" * 16)

    csv_path = tmp_path / "s.csv"
    cli_io.write_samples_csv(small_samples, csv_path)
    text = csv_path.read_text().replace('"N":1000', '"N":999')
    csv_path.write_text(text)
    with pytest.raises(CacheConflict):
        cli_io.read_samples_csv(csv_path)


def test_load_or_sample_hits_cache(tmp_path, pair_tuple):
    a, hit_a = load_or_sample(pair_tuple, 1e3, 40, 3, tmp_path)
    b, hit_b = load_or_sample(pair_tuple, 1e3, 40, 3, tmp_path)
    assert (hit_a, hit_b) == (False, True)
    _same(a, b)


def _args(tmp_path, *extra):
    return ["--tuple", "zeta@0,chi:4:1@0", "--out", str(tmp_path / "out"),
            "--cache", str(tmp_path / "cache"), *extra]


def test_sample_twice_is_cache_hit(tmp_path):
    args = ["sample", *_args(tmp_path, "--T", "1000", "--N", "60", "--seed", "4")]
    assert main(args) == 0
    assert main(args) == 0
    summary = json.loads((tmp_path / "out" / "sample.json").read_text())
    assert summary["outputs"]["cache_hit"] == [True]
    assert summary["clean"] is True
    assert summary["schema"] == cli_io.SUMMARY_SCHEMA


def test_tails_deterministic_bytes(tmp_path):
    args = ["tails", *_args(tmp_path, "--T", "1000", "--N", "60", "--V", "0")]
    assert main(args) == 0
    first = (tmp_path / "out" / "tails.csv").read_bytes()
    assert main(args) == 0
    assert (tmp_path / "out" / "tails.csv").read_bytes() == first
    lines = [l for l in first.decode().splitlines() if not l.startswith("#")]
    assert len(lines) == 2  # header + one report row
    assert b"fingerprint" in first and b"lvaluelab" in first


def test_random_model_below_two(tmp_path):
    args = ["random-model", "--tuple", "zeta@0", "--X", "1.5", "--N", "20", "--k", "0.3", "1",
            "--out", str(tmp_path), "--cache", str(tmp_path / "c")]
    assert main(args) == 0
    with open(tmp_path / "random-model.csv") as fh:
        rows = list(csv.DictReader(l for l in fh if not l.startswith("#")))
    assert [float(r["product_mgf"]) for r in rows] == [1.0, 1.0]
    assert [float(r["mc_mgf"]) for r in rows] == [1.0, 1.0]


def test_exit_codes(tmp_path):
    assert main(["bogus"]) == 1
    assert main(["tails", *_args(tmp_path, "--N", "0")]) == 1
    assert main(["tails", "--tuple", "chi:4:2@0", "--out", str(tmp_path)]) == 1
    # numerical failure: the local MGF quadrature cannot converge at this size of tilt
    with np.errstate(all="ignore"):
        code = main(["random-model", "--tuple", "zeta@0", "--X", "10", "--N", "5", "--k", "2000",
                     "--out", str(tmp_path / "n"), "--cache", str(tmp_path / "c")])
    assert code == 2
    summary = json.loads((tmp_path / "n" / "random-model.json").read_text())
    assert summary["clean"] is False and "numerical failure" in summary["errors"][0]
    assert not (tmp_path / "n" / "random-model.csv").exists()


def test_cache_locked_exit_code(tmp_path, monkeypatch):
    monkeypatch.setattr(cli_io, "LOCK_TIMEOUT", 0.1)
    cache = tmp_path / "cache"
    cache.mkdir()
    with FileLock(str(cache / ".lock")):
        code = main(["sample", *_args(tmp_path, "--N", "5")])
    assert code == 3
    summary = json.loads((tmp_path / "out" / "sample.json").read_text())
    assert summary["clean"] is False and summary["errors"]


def test_cache_conflict_exit_code(tmp_path, pair_tuple):
    s, _ = load_or_sample(pair_tuple, 1e3, 30, 0, tmp_path / "cache")
    path = next((tmp_path / "cache").glob("samples-*.npz"))
    with np.load(path) as d:
        parts = {k: d[k] for k in d.files}
    parts["t"] = parts["t"] + 1.0
    np.savez(path, **parts)
    assert main(["tails", *_args(tmp_path, "--T", "1000", "--N", "30", "--seed", "0")]) == 3


def test_env_cache_default(tmp_path, monkeypatch):
    monkeypatch.setenv(cli_io.CACHE_ENV, str(tmp_path / "envcache"))
    assert cli_io.default_cache_dir() == tmp_path / "envcache"
