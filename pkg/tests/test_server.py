"""HTTP service: session lifecycle, caching, determinism, error codes."""

import io

import numpy as np
import pytest
from fastapi.testclient import TestClient
from PIL import Image

from cellflood.core import PipelineParams
from cellflood.server import ServerConfig, create_app
from cellflood.synth import gaussian_blobs

TUNED = PipelineParams(background_size=25, median_size=3, gaussian_radius=3.0,
                       min_area=10, max_area=4000, min_signal=0.05)


def png_bytes(seed=31, n_blobs=10, size=160, **kw):
    sample = gaussian_blobs(width=size, height=size, n_blobs=n_blobs, seed=seed,
                            **kw)
    arr = np.rint(sample.image.data * 255).astype(np.uint8)
    buf = io.BytesIO()
    Image.fromarray(arr, mode="RGB").save(buf, format="PNG")
    return buf.getvalue(), sample


@pytest.fixture(scope="module")
def client():
    app = create_app(ServerConfig(max_upload_bytes=8 * 1024 * 1024))
    with TestClient(app) as c:
        yield c


@pytest.fixture(scope="module")
def session(client):
    body, sample = png_bytes()
    res = client.post("/api/session", content=body,
                      headers={"content-type": "image/png"})
    assert res.status_code == 201
    return res.json()["id"]


class TestUpload:
    def test_valid_png(self, client):
        body, _ = png_bytes(seed=1)
        res = client.post("/api/session", content=body)
        assert res.status_code == 201
        data = res.json()
        assert set(data) == {"id", "width", "height"}
        assert data["width"] == 160 and data["height"] == 160

    def test_text_body_415(self, client):
        res = client.post("/api/session", content=b"hello, not an image")
        assert res.status_code == 415

    def test_second_upload_distinct_id(self, client):
        body, _ = png_bytes(seed=2)
        a = client.post("/api/session", content=body).json()["id"]
        b = client.post("/api/session", content=body).json()["id"]
        assert a != b

    def test_oversize_413(self):
        app = create_app(ServerConfig(max_upload_bytes=1024))
        with TestClient(app) as small:
            body, _ = png_bytes(seed=3)
            res = small.post("/api/session", content=body)
            assert res.status_code == 413

    def test_unknown_session_404(self, client):
        res = client.post("/api/session/deadbeef/segment",
                          json=TUNED.to_dict())
        assert res.status_code == 404


class TestSegment:
    def test_valid_request_lists_steps(self, client, session):
        res = client.post(f"/api/session/{session}/segment", json=TUNED.to_dict())
        assert res.status_code == 200
        data = res.json()
        assert data["region_count"] == len(data["regions"])
        assert len(data["steps"]) >= 9
        names = [s["name"] for s in data["steps"]]
        assert names[0] == "grayscale" and names[-1] == "final"
        # overlay and each step are fetchable PNGs
        overlay = client.get(data["overlay_url"])
        assert overlay.status_code == 200
        assert overlay.headers["content-type"] == "image/png"
        step = client.get(data["steps"][3]["url"])
        assert step.content[:8] == b"\x89PNG\r\n\x1a\n"

    def test_repeated_request_identical_body(self, client, session):
        a = client.post(f"/api/session/{session}/segment", json=TUNED.to_dict())
        b = client.post(f"/api/session/{session}/segment", json=TUNED.to_dict())
        assert a.content == b.content

    def test_repeated_classify_and_sweep_identical_bodies(self, client, session):
        client.post(f"/api/session/{session}/segment", json=TUNED.to_dict())
        body = {"expr": "mean(R)-mean(G)", "threshold": 0.0}
        a = client.post(f"/api/session/{session}/classify", json=body)
        b = client.post(f"/api/session/{session}/classify", json=body)
        assert a.content == b.content
        states = [{"label": int(l), "state": s}
                  for l, s in a.json()["states"].items()]
        client.post(f"/api/session/{session}/ground-truth", json={"states": states})
        s1 = client.post(f"/api/session/{session}/sweep", json={"steps": 41})
        s2 = client.post(f"/api/session/{session}/sweep", json={"steps": 41})
        assert s1.content == s2.content

    def test_even_background_size_422_names_field(self, client, session):
        bad = TUNED.to_dict()
        bad["background_size"] = 18
        res = client.post(f"/api/session/{session}/segment", json=bad)
        assert res.status_code == 422
        assert "background_size" in res.json()["detail"]["errors"]

    def test_unknown_param_422(self, client, session):
        bad = TUNED.to_dict()
        bad["blur"] = 1
        res = client.post(f"/api/session/{session}/segment", json=bad)
        assert res.status_code == 422
        assert "blur" in res.json()["detail"]["errors"]


class TestClassify:
    def test_requires_segmentation_first(self, client):
        body, _ = png_bytes(seed=4)
        sid = client.post("/api/session", content=body).json()["id"]
        res = client.post(f"/api/session/{sid}/classify",
                          json={"expr": "mean(R)", "threshold": 0.1})
        assert res.status_code == 409

    def test_auto_threshold_echoed(self, client, session):
        client.post(f"/api/session/{session}/segment", json=TUNED.to_dict())
        res = client.post(f"/api/session/{session}/classify",
                          json={"expr": "mean(R)", "threshold": "auto"})
        assert res.status_code == 200
        data = res.json()
        assert data["threshold_mode"] == "otsu"

        from cellflood.classify import otsu_threshold_1d
        f = [float(v) for v in data["f_values"].values()]
        assert data["threshold_used"] == pytest.approx(otsu_threshold_1d(f))

    def test_malformed_expr_422_with_position(self, client, session):
        client.post(f"/api/session/{session}/segment", json=TUNED.to_dict())
        res = client.post(f"/api/session/{session}/classify",
                          json={"expr": "mean(R", "threshold": 0.5})
        assert res.status_code == 422
        assert isinstance(res.json()["detail"]["position"], int)

    def test_state_counts_sum_to_region_count(self, client, session):
        seg = client.post(f"/api/session/{session}/segment",
                          json=TUNED.to_dict()).json()
        res = client.post(f"/api/session/{session}/classify",
                          json={"expr": "mean(R)-mean(G)", "threshold": 0.0})
        data = res.json()
        counts = data["state_counts"]
        assert counts["1"] + counts["2"] == seg["region_count"]
        assert set(data["states"].values()) <= {1, 2}
        overlay = client.get(data["overlay_url"])
        assert overlay.status_code == 200


class TestTruthAndSweep:
    def prepared(self, client):
        body, _ = png_bytes(seed=5)
        sid = client.post("/api/session", content=body).json()["id"]
        client.post(f"/api/session/{sid}/segment", json=TUNED.to_dict())
        res = client.post(f"/api/session/{sid}/classify",
                          json={"expr": "mean(R)-mean(G)", "threshold": 0.0})
        return sid, res.json()

    def test_separable_truth_perfect_accuracy(self, client):
        sid, classified = self.prepared(client)
        states = [{"label": int(l), "state": s}
                  for l, s in classified["states"].items()]
        res = client.post(f"/api/session/{sid}/ground-truth",
                          json={"states": states})
        assert res.status_code == 200
        sweep = client.post(f"/api/session/{sid}/sweep",
                            json={"lo": -1.0, "hi": 1.0, "steps": 101})
        assert sweep.status_code == 200
        data = sweep.json()
        assert data["optimal_accuracy"] == 1.0
        assert len(data["thresholds"]) == len(data["accuracies"]) == 101

    def test_unknown_truth_label_422(self, client):
        sid, _ = self.prepared(client)
        res = client.post(f"/api/session/{sid}/ground-truth",
                          json={"states": [{"label": 9999, "state": 1}]})
        assert res.status_code == 422
        assert "unknown labels" in str(res.json()["detail"]["errors"])

    def test_sweep_requires_truth(self, client):
        sid, _ = self.prepared(client)
        res = client.post(f"/api/session/{sid}/sweep", json={})
        assert res.status_code == 409

    def test_sweep_matches_cli_computation(self, client, tmp_path):
        # the sweep endpoint and the library/CLI path produce identical arrays
        sid, classified = self.prepared(client)
        states = [{"label": int(l), "state": s}
                  for l, s in classified["states"].items()]
        client.post(f"/api/session/{sid}/ground-truth", json={"states": states})
        data = client.post(f"/api/session/{sid}/sweep",
                           json={"lo": -1.0, "hi": 1.0, "steps": 51}).json()

        from cellflood.optimize import GroundTruthStates, threshold_sweep
        f_values = {int(l): float(v) for l, v in classified["f_values"].items()}
        truth = GroundTruthStates.from_pairs(
            [(int(l), s) for l, s in classified["states"].items()])
        expected = threshold_sweep(f_values, truth, (-1.0, 1.0), 51)
        assert data["thresholds"] == [float(t) for t in expected.thresholds]
        assert data["accuracies"] == [float(a) for a in expected.accuracies]
        assert data["optimal_threshold"] == expected.optimal_threshold


class TestSessionIsolation:
    def test_sessions_do_not_share_artifacts(self, client):
        body_a, _ = png_bytes(seed=6)
        body_b, _ = png_bytes(seed=7)
        sid_a = client.post("/api/session", content=body_a).json()["id"]
        sid_b = client.post("/api/session", content=body_b).json()["id"]
        seg_a = client.post(f"/api/session/{sid_a}/segment",
                            json=TUNED.to_dict()).json()
        key = seg_a["params_key"]
        # session B cannot read session A's artifact
        res = client.get(f"/api/session/{sid_b}/artifact/{key}/overlay")
        assert res.status_code == 404

    def test_cache_invalidation_on_param_change(self, client):
        body, _ = png_bytes(seed=8)
        sid = client.post("/api/session", content=body).json()["id"]
        client.post(f"/api/session/{sid}/segment", json=TUNED.to_dict())
        classified = client.post(f"/api/session/{sid}/classify",
                                 json={"expr": "mean(R)", "threshold": 0.1}).json()
        states = [{"label": int(l), "state": s}
                  for l, s in classified["states"].items()]
        res = client.post(f"/api/session/{sid}/ground-truth",
                          json={"states": states})
        assert res.status_code == 200
        assert client.post(f"/api/session/{sid}/sweep", json={}).status_code == 200

        # new params renumber labels: classification and truth are both stale
        changed = TUNED.updated(min_area=20).to_dict()
        client.post(f"/api/session/{sid}/segment", json=changed)
        res = client.post(f"/api/session/{sid}/sweep", json={})
        assert res.status_code == 409

        # re-segmenting with the original params is a pure cache hit and
        # must not invalidate anything
        client.post(f"/api/session/{sid}/segment", json=TUNED.to_dict())
        client.post(f"/api/session/{sid}/classify",
                    json={"expr": "mean(R)", "threshold": 0.1})
        client.post(f"/api/session/{sid}/ground-truth", json={"states": states})
        assert client.post(f"/api/session/{sid}/sweep", json={}).status_code == 200
        client.post(f"/api/session/{sid}/segment", json=TUNED.to_dict())
        assert client.post(f"/api/session/{sid}/sweep", json={}).status_code == 200

    def test_session_expiry(self):
        app = create_app(ServerConfig(session_ttl_seconds=0.0))
        with TestClient(app) as c:
            body, _ = png_bytes(seed=9)
            sid = c.post("/api/session", content=body).json()["id"]
            res = c.post(f"/api/session/{sid}/segment", json=TUNED.to_dict())
            assert res.status_code == 404
