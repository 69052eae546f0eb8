"""Regenerate the recorded advisor fixtures used by the console tests.

Run from this directory (the tbm_advisor package must be importable):

    python3 record.py

Writes service/physics.json + service/model.json (also used by the live
integration test) and responses/*.json with the exact bytes the HTTP
service would return for each scripted scenario, plus scenarios.json
describing the requests. Responses are recorded through the same
document builder and serializer the server's transport uses, so the
bytes match a live /optimize answer for the same model.

Training is fully seeded; reruns reproduce identical files.
"""
import json
import pathlib
import sys

from tbm_advisor import datagen, decision, mapping, physics, service

HERE = pathlib.Path(__file__).resolve().parent

CONTEXTS = {
    "mid": {"ucs": 100.0, "rqd": 60.0, "cai": 3.0, "d_avg": 15.0,
            "ci": 380.0, "peak_acc": 2.2, "main_freq": 113.0},
    "hard": {"ucs": 124.0, "rqd": 45.0, "cai": 4.2, "d_avg": 12.0,
             "ci": 420.0, "peak_acc": 2.6, "main_freq": 114.0},
    "medium_soft": {"ucs": 80.0, "rqd": 70.0, "cai": 2.4, "d_avg": 20.0,
                    "ci": 350.0, "peak_acc": 1.9, "main_freq": 112.0},
    "soft": {"ucs": 55.0, "rqd": 75.0, "cai": 2.0, "d_avg": 25.0,
             "ci": 320.0, "peak_acc": 1.7, "main_freq": 111.0},
}

# role "scenario" entries are the scripted console walkthrough; "whatif"
# entries pair with a scenario to exercise override behaviour.
SCENARIOS = [
    {
        "name": "s1_baseline",
        "role": "scenario",
        "title": "mid-strength rock, default limits, full grid",
        "expect": "optimal",
        "request": {"context": CONTEXTS["mid"], "include_grid": True},
    },
    {
        "name": "s2_infeasible",
        "role": "scenario",
        "title": "thrust cap squeezed until nothing passes",
        "expect": "infeasible",
        "request": {
            "context": CONTEXTS["mid"],
            "limits": {"safety_factor_thrust": 0.02},
            "include_grid": True,
        },
    },
    {
        "name": "s3_hard_rock",
        "role": "scenario",
        "title": "hard rock with relaxed safety factors, coarse rpm",
        "expect": "optimal",
        "request": {
            "context": CONTEXTS["hard"],
            "limits": {"safety_factor_thrust": 0.5, "safety_factor_torque": 0.5},
            "grid": {"rpm_step": 0.5},
            "include_grid": True,
        },
    },
    {
        "name": "s4_cost_shift",
        "role": "scenario",
        "title": "medium rock with doubled daily operating cost",
        "expect": "optimal",
        "request": {
            "context": CONTEXTS["medium_soft"],
            "cost": {"c1": 40000.0},
            "grid": {"rpm_step": 0.5, "p_step": 2.0},
            "include_grid": True,
        },
    },
    {
        "name": "s5_soft_rock",
        "role": "scenario",
        "title": "soft rock, derated belt, custom grid window",
        "expect": "optimal",
        "request": {
            "context": CONTEXTS["soft"],
            "limits": {"belt_rated": 450.0},
            "grid": {"rpm_min": 2.0, "rpm_max": 8.0, "rpm_step": 0.5,
                     "p_min": 2.0, "p_max": 14.0, "p_step": 1.0},
            "include_grid": True,
        },
    },
    {
        "name": "s1b_safer_thrust",
        "role": "whatif",
        "pairs_with": "s1_baseline",
        "title": "s1 with the thrust safety factor raised 0.4 -> 0.5",
        "expect": "optimal",
        "request": {
            "context": CONTEXTS["mid"],
            "limits": {"safety_factor_thrust": 0.5},
            "include_grid": True,
        },
    },
    {
        "name": "s4b_costlier_day",
        "role": "whatif",
        "pairs_with": "s4_cost_shift",
        "title": "s4 with c1 raised again; masks must not move",
        "expect": "optimal",
        "request": {
            "context": CONTEXTS["medium_soft"],
            "cost": {"c1": 60000.0},
            "grid": {"rpm_step": 0.5, "p_step": 2.0},
            "include_grid": True,
        },
    },
]


def build_model():
    rules = physics.default_rules()
    dataset = datagen.generate_dataset(datagen.GenConfig(sample_count=306, seed=16))
    hp = mapping.Hyperparams(h1=96, h2=96, alpha=0.003, epochs=1000,
                             batch_size=32, seed=16)
    model, report = mapping.train(dataset, hp, train_count=256, test_count=50)
    print(f"model MAPE: {report.metrics.to_dict()}", file=sys.stderr)
    return model, rules


def main() -> int:
    service_dir = HERE / "service"
    responses_dir = HERE / "responses"
    service_dir.mkdir(exist_ok=True)
    responses_dir.mkdir(exist_ok=True)

    model, rules = build_model()
    physics.save_rules(rules, service_dir / "physics.json")
    mapping.save_model(model, service_dir / "model.json")
    svc = service.AdvisorService(model, rules)
    print(f"model digest: {svc.digest}", file=sys.stderr)

    manifest = []
    for scenario in SCENARIOS:
        status_code, doc = svc.handle_optimize(scenario["request"])
        assert status_code == 200
        raw = decision.dumps_document(doc)
        if doc["status"] != scenario["expect"]:
            raise SystemExit(
                f"{scenario['name']}: expected {scenario['expect']}, "
                f"got {doc['status']}; adjust the scenario"
            )
        (responses_dir / f"{scenario['name']}.json").write_text(raw)
        manifest.append({
            "name": scenario["name"],
            "role": scenario["role"],
            "pairs_with": scenario.get("pairs_with"),
            "title": scenario["title"],
            "request": scenario["request"],
            "response_file": f"responses/{scenario['name']}.json",
            "status": doc["status"],
            "feasible_count": doc["feasible_count"],
        })
        print(f"{scenario['name']}: {doc['status']}, "
              f"{doc['feasible_count']} feasible, {len(raw)} bytes",
              file=sys.stderr)

    (HERE / "scenarios.json").write_text(json.dumps(manifest, indent=2) + "\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())
