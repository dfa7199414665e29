import csv
import io
import json
from fractions import Fraction

from coprime_approx.io import SCHEMA_VERSION, canonical_bytes, flatten_row, metadata, render
from coprime_approx.precision import RealScalar


def _rows():
    return [{"q": 3, "err": RealScalar.exact(Fraction(1, 3), 64), "ok": True, "tag": Fraction(2, 5)}]


def test_flatten_splits_balls():
    row = flatten_row(_rows()[0])
    assert row["q"] == 3 and row["tag"] == "2/5"
    assert row["err"].startswith("0.33333333")
    assert float(row["err_radius"]) > 0


def test_csv_has_metadata_header():
    meta = metadata("cf", {"xi": "golden"}, seed=7, precision={"start_bits": 128})
    text = render(_rows(), "csv", meta)
    lines = text.splitlines()
    assert lines[0] == f"# schema_version: {SCHEMA_VERSION}"
    assert any(line.startswith("# timestamp:") for line in lines)
    body = [line for line in lines if not line.startswith("#")]
    rows = list(csv.DictReader(io.StringIO("\n".join(body))))
    assert rows[0]["q"] == "3" and "err_radius" in rows[0]


def test_json_and_jsonl():
    meta = metadata("cf", {"xi": "golden"})
    doc = json.loads(render(_rows(), "json", meta))
    assert doc["metadata"]["command"] == "cf" and doc["rows"][0]["q"] == 3
    lines = render(_rows(), "jsonl", meta).splitlines()
    assert "metadata" in json.loads(lines[0]) and json.loads(lines[1])["ok"] is True


def test_canonical_bytes_ignore_timestamp():
    m1 = metadata("x", {}, seed=1)
    m2 = dict(m1, timestamp="1999-01-01T00:00:00+00:00")
    for fmt in ("csv", "json", "jsonl"):
        a, b = render(_rows(), fmt, m1), render(_rows(), fmt, m2)
        assert a != b
        assert canonical_bytes(a) == canonical_bytes(b)
