import json
import threading
from urllib.error import HTTPError
from urllib.request import Request, urlopen

import numpy as np
import pytest

from tbm_advisor import InvalidInputError, datagen, decision, mapping, physics, service


@pytest.fixture(scope="module")
def trained():
    rules = physics.default_rules()
    dataset = datagen.generate_dataset(datagen.GenConfig(sample_count=60, seed=2))
    hp = mapping.Hyperparams(h1=8, h2=8, alpha=0.003, epochs=5, batch_size=16, seed=1)
    model, report = mapping.train(dataset, hp, train_count=50, test_count=10)
    return model, rules, report, dataset


@pytest.fixture(scope="module")
def svc(trained):
    model, rules, report, _ = trained
    return service.AdvisorService(model, rules, metrics=report.metrics.to_dict())


@pytest.fixture(scope="module")
def server(svc):
    srv = service.start_server(svc, "127.0.0.1", 0)
    thread = threading.Thread(target=srv.serve_forever, daemon=True)
    thread.start()
    yield srv
    srv.shutdown()
    srv.server_close()
    thread.join(timeout=5)


def url(srv, path):
    host, port = srv.server_address[:2]
    return f"http://{host}:{port}{path}"


def get(srv, path):
    try:
        with urlopen(url(srv, path)) as resp:
            return resp.status, resp.read()
    except HTTPError as err:
        return err.code, err.read()


def post(srv, path, doc=None, raw=None):
    body = raw if raw is not None else json.dumps(doc).encode()
    req = Request(url(srv, path), data=body, method="POST",
                  headers={"Content-Type": "application/json"})
    try:
        with urlopen(req) as resp:
            return resp.status, resp.read()
    except HTTPError as err:
        return err.code, err.read()


def in_range_features(model):
    mid = (model.feature_min + model.feature_max) / 2.0
    return {name: float(mid[i]) for i, name in enumerate(datagen.FEATURE_NAMES)}


CTX = {
    "ucs": 100.0, "rqd": 60.0, "cai": 3.0, "d_avg": 15.0,
    "ci": 380.0, "peak_acc": 2.2, "main_freq": 113.0,
}


def test_healthz(server, svc):
    code, body = get(server, "/healthz")
    assert code == 200
    doc = json.loads(body)
    assert doc == {"status": "ok", "model_digest": svc.digest}
    assert len(svc.digest) == 64


def test_cors_headers(server):
    # responses are origin-agnostic and preflight is answered, so a browser
    # console served from another origin can talk to the API
    with urlopen(url(server, "/healthz")) as resp:
        assert resp.headers["Access-Control-Allow-Origin"] == "*"
    req = Request(url(server, "/optimize"), method="OPTIONS")
    with urlopen(req) as resp:
        assert resp.status == 204
        assert resp.headers["Access-Control-Allow-Origin"] == "*"
        assert "POST" in resp.headers["Access-Control-Allow-Methods"]
        assert resp.headers["Access-Control-Allow-Headers"] == "Content-Type"


def test_model_endpoint(server, trained, svc):
    model, rules, report, _ = trained
    code, body = get(server, "/model")
    assert code == 200
    doc = json.loads(body)
    assert doc["dims"] == {"in": 9, "h1": 8, "h2": 8, "out": 4}
    assert doc["physics_digest"] == physics.rules_digest(rules)
    assert doc["model_digest"] == svc.digest
    assert mapping.Hyperparams.from_dict(doc["hyperparams"]) == model.hyperparams
    assert doc["metrics"] == report.metrics.to_dict()


def test_predict_matches_library(server, trained):
    model, _, _, dataset = trained
    feats = dict(zip(datagen.FEATURE_NAMES, dataset[0].features()))
    code, body = post(server, "/predict", feats)
    assert code == 200
    doc = json.loads(body)
    pred = model.predict(np.array(dataset[0].features()))
    assert doc["th"] == float(pred[mapping.TH_IDX])
    assert doc["tor"] == float(pred[mapping.TOR_IDX])
    assert doc["hf"] == float(pred[mapping.HF_IDX])
    assert doc["pb"] == float(pred[mapping.PB_IDX])
    assert doc["warnings"] == []


def test_predict_range_warning(server, trained):
    model, _, _, _ = trained
    feats = in_range_features(model)
    feats["ucs"] = float(model.feature_max[2]) + 50.0
    code, body = post(server, "/predict", feats)
    assert code == 200
    warnings = json.loads(body)["warnings"]
    assert len(warnings) == 1
    assert warnings[0].startswith("ucs outside training range")


def test_predict_missing_field(server, trained):
    feats = in_range_features(trained[0])
    del feats["cai"]
    code, body = post(server, "/predict", feats)
    assert code == 400
    assert "cai" in json.loads(body)["error"]


def test_predict_non_finite_field(server, trained):
    feats = in_range_features(trained[0])
    feats["rqd"] = "not-a-number"
    code, body = post(server, "/predict", feats)
    assert code == 400
    assert "rqd" in json.loads(body)["error"]
    feats["rqd"] = float(trained[0].feature_min[3])
    code, body = post(server, "/predict", {**feats, "extra": 1.0})
    assert code == 400
    assert "extra" in json.loads(body)["error"]


def test_optimize_matches_direct_call_bytes(server, trained, svc):
    model, rules, _, _ = trained
    code, body = post(server, "/optimize", {"context": CTX})
    assert code == 200
    direct = decision.optimize_document(
        model, rules, decision.DecisionContext.from_dict(CTX),
        model_digest=svc.digest,
    )
    assert body == decision.dumps_document(direct).encode()
    doc = json.loads(body)
    assert doc["model_digest"] == svc.digest
    assert len(doc["grid"]["cells"]) == 1717


def test_optimize_without_grid(server):
    code, body = post(server, "/optimize", {"context": CTX, "include_grid": False})
    assert code == 200
    doc = json.loads(body)
    assert "grid" not in doc
    assert doc["status"] in ("optimal", "infeasible")


def test_optimize_custom_limits_infeasible(server):
    limits = {"thrust_rated": 1e-6, "torque_rated": 1e-6, "belt_rated": 1e-6}
    code, body = post(
        server, "/optimize",
        {"context": CTX, "limits": limits, "include_grid": False},
    )
    assert code == 200
    doc = json.loads(body)
    assert doc["status"] == "infeasible"
    assert doc["optimum"] is None


def test_optimize_rejects_bad_input(server):
    code, body = post(server, "/optimize", {"context": {"ucs": 100.0}})
    assert code == 400
    code, body = post(server, "/optimize", {"context": CTX, "grid": {"rpm_lo": 1}})
    assert code == 400
    assert "rpm_lo" in json.loads(body)["error"]
    code, body = post(server, "/optimize", {"context": {**CTX, "ucs": 1e6}})
    assert code == 400  # critical-penetration rule undefined this far out
    code, body = post(server, "/optimize", {})
    assert code == 400
    assert "context" in json.loads(body)["error"]


def test_malformed_json_and_routing(server):
    code, body = post(server, "/optimize", raw=b"{not json")
    assert code == 400
    code, _ = get(server, "/predict")
    assert code == 405
    code, _ = post(server, "/healthz", {})
    assert code == 405
    code, _ = get(server, "/nope")
    assert code == 404
    code, _ = post(server, "/nope", {})
    assert code == 404


def test_request_size_limit(trained):
    model, rules, _, _ = trained
    svc = service.AdvisorService(model, rules, max_request_bytes=64)
    srv = service.start_server(svc, "127.0.0.1", 0)
    thread = threading.Thread(target=srv.serve_forever, daemon=True)
    thread.start()
    try:
        code, body = post(srv, "/optimize", {"context": CTX, "padding": "x" * 500})
        assert code == 413
    finally:
        srv.shutdown()
        srv.server_close()
        thread.join(timeout=5)


def test_concurrent_identical_requests(server, trained):
    feats = in_range_features(trained[0])
    results = [None] * 12

    def worker(i):
        if i % 2:
            results[i] = post(server, "/predict", feats)
        else:
            results[i] = post(server, "/optimize",
                              {"context": CTX, "include_grid": False})

    threads = [threading.Thread(target=worker, args=(i,)) for i in range(12)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    predict_bodies = {results[i][1] for i in range(12) if i % 2}
    optimize_bodies = {results[i][1] for i in range(12) if not i % 2}
    assert all(results[i][0] == 200 for i in range(12))
    assert len(predict_bodies) == 1
    assert len(optimize_bodies) == 1


def test_digest_mismatch_rejected(trained):
    model, rules, _, _ = trained
    other = physics.PhysicsRules(
        fn=rules.fn, fr=rules.fr, cp=physics.CpRule(a=-0.03, b=20.0),
        layout=rules.layout,
    )
    with pytest.raises(InvalidInputError):
        service.AdvisorService(model, other)


def test_run_round_trip(tmp_path, trained):
    # config-level loading path: save artifacts, then boot from files
    model, rules, _, _ = trained
    mpath = tmp_path / "model.json"
    ppath = tmp_path / "physics.json"
    mapping.save_model(model, mpath)
    physics.save_rules(rules, ppath)
    cfg = service.ServiceConfig(model_path=str(mpath), physics_path=str(ppath))
    svc = service.load_service(cfg)
    assert svc.digest == mapping.model_digest(model)
    code, doc = svc.handle_healthz()
    assert code == 200 and doc["status"] == "ok"
