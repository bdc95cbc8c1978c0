#!/usr/bin/env python3
"""Regenerate fixtures/. Output is deterministic; rerun after editing."""

import copy
import json
import random
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent / "fixtures"

GPU_FP32 = 15e12
NODES = 8
GPUS_PER_NODE = 8


def system(name, mixed_per_gpu):
    return {
        "name": name,
        "num_nodes": NODES,
        "node": {
            "accelerators_per_node": GPUS_PER_NODE,
            "accelerator": {
                "name": "V100-SXM2-32GB",
                "peak_flops": {"fp32": GPU_FP32, "mixed": mixed_per_gpu},
                "memory_bandwidth": 1134e9,
                "memory_capacity": 32e9,
            },
            "intra_node_bandwidth": 300e9,
            "system_memory": 384e9,
            "storage": 2e12,
        },
        # 10 Gb/s Ethernet, 1.2 GB/s sustained.
        "inter_node_bandwidth_nominal": 10e9 / 8,
        "inter_node_bandwidth_effective": 1.2e9,
    }


IC = {
    "name": "image_classification",
    "flops_per_sample": 23e9,
    "params_count": 25e6,
    "bytes_per_param": 4,
    "comp_per_step": 2944e9,
    "comm_per_step": 25e6,
    "target_quality": {"metric_name": "top1_accuracy", "value": 0.763},
    "quality_exponent_n": 5,
    "epochs": 90,
    "dataset_samples": 1281167,
    "min_runs": 10,
}

EWA = {
    "name": "extreme_weather_analytics",
    "flops_per_sample": 691e9,
    "params_count": 41e6,
    "bytes_per_param": 4,
    "comp_per_step": 691e9,
    "comm_per_step": 41e6,
    "target_quality": {"metric_name": "map_iou_0.5", "value": 0.35},
    "quality_exponent_n": 10,
    "epochs": 50,
    "dataset_samples": 13140,
    "min_runs": 5,
}


def declaration(workload, dataset, epochs, batch, target):
    return {
        "hardware": {"cpu": "2x Xeon Gold 6148", "accelerator": "8x V100-SXM2-32GB"},
        "os": {"kernel": "linux-3.10", "distribution": "centos-7.6"},
        "communication_libraries": {"mpi": "openmpi-3.1", "collective": "nccl-2.4", "allreduce_topology": "ring"},
        "accelerator_libraries": {"cuda": "10.0", "cudnn": "7.6"},
        "ai_framework": {"framework": "tensorflow-1.14", "distribution": "horovod-0.16"},
        "programming_model": {"parallel_mode": "data", "sync_mode": "synchronous"},
        "workload": {"workload": workload, "model": "resnet50" if dataset == "imagenet" else "faster_rcnn"},
        "hyper_parameters": {
            "batchsize": batch,
            "optimizer": "momentum_sgd",
            "momentum": 0.9,
            "weight_decay": 0.0001,
            "bn_weight_decay": "enabled",
            "lr_policy": "linear_scaling_warmup_cosine",
            "lr_base": 0.1,
            "lr_warmup_epochs": 5,
        },
        "problem_domain": {"dataset": dataset, "epochs": epochs, "target_quality": target},
    }


IC_DECL = declaration("image_classification", "imagenet", 90, 256, 0.763)
EWA_DECL = declaration("extreme_weather_analytics", "ewa", 50, 64, 0.35)

# (precision, scale) -> per-GPU FLOPS, achieved quality, watts per GPU or None.
IC_CONFIGS = {
    ("fp32", 8): (7.20e12, 0.7650, None),
    ("fp32", 16): (7.00e12, 0.7645, 290.0),
    ("fp32", 32): (6.80e12, 0.7640, 285.0),
    ("fp32", 64): (414e12 / 64, 0.7632, 280.0),
    ("mixed", 8): (16.5e12, 0.7610, 300.0),
    ("mixed", 16): (16.0e12, 0.7605, 298.0),
    ("mixed", 32): (15.5e12, 0.7600, 295.0),
    # Implied by 939 TFLOPS scoring 642 TVFLOPS at n = 5.
    ("mixed", 64): (939e12 / 64, 0.7071, 292.0),
}


def make_run(workload, decl, run_id, precision, scale, per_gpu_flops, quality, watts, rng, epochs, samples):
    batch = 32 * scale
    spsr = per_gpu_flops / workload["flops_per_sample"]
    ept = epochs - rng.choice([0, 0, 0.5, 1, 1.5, 2])
    wall = ept * samples / (spsr * scale) * (1 + rng.uniform(-0.01, 0.01))
    d = copy.deepcopy(decl)
    d["hyper_parameters"]["batchsize"] = batch
    d["hyper_parameters"]["lr_base"] = round(0.1 * batch / 256, 6)
    if precision == "mixed":
        d["accelerator_libraries"]["amp"] = "enabled"
    run = {
        "run_id": run_id,
        "workload": workload["name"],
        "system": "v100-8node",
        "scale": scale,
        "precision": precision,
        "global_batchsize": batch,
        "achieved_quality": round(quality + rng.uniform(-0.0004, 0.0004), 5) if quality > 0.71 else quality,
        "wall_time": round(wall, 3),
        "epochs_to_quality": ept,
        "samples_per_second_per_rank": spsr,
        "num_ranks": scale,
        "level": "hardware",
        "declaration": d,
    }
    if watts is not None:
        run["average_power"] = round(watts * scale * (1 + rng.uniform(-0.02, 0.02)), 1)
    return run


def write(path, obj):
    path = ROOT / path
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, indent=2) + "\n")


def main():
    rng = random.Random(20201015)
    write("systems/v100_cluster.json", system("v100-8node", 120e12))
    write("systems/roofline.json", system("roofline-8node", 130e12))
    write("workloads/image_classification.json", IC)
    write("workloads/extreme_weather_analytics.json", EWA)
    write("declarations/image_classification.json", IC_DECL)
    write("declarations/extreme_weather_analytics.json", EWA_DECL)

    for (precision, scale), (flops, quality, watts) in IC_CONFIGS.items():
        for i in range(1, 11):
            rid = f"ic-{precision}-{scale:02d}-r{i:02d}"
            run = make_run(IC, IC_DECL, rid, precision, scale, flops, quality, watts, rng, 90, IC["dataset_samples"])
            write(f"runs/image_classification/{rid}.json", run)

    for i in range(1, 6):
        rid = f"ewa-fp32-16-r{i:02d}"
        run = make_run(EWA, EWA_DECL, rid, "fp32", 16, 25.99e12 / 16, 0.352, 300.0, rng, 50, EWA["dataset_samples"])
        run["epochs_to_quality"] = 50
        write(f"runs/extreme_weather_analytics/{rid}.json", run)

    # Rule fixtures: each differs from the reference in exactly one way.
    base = make_run(IC, IC_DECL, "rule-base", "fp32", 16, 7e12, 0.764, 290.0, rng, 90, IC["dataset_samples"])
    bn = copy.deepcopy(base)
    bn["run_id"] = "rule-bn-weight-decay"
    bn["declaration"]["hyper_parameters"]["bn_weight_decay"] = "disabled"
    lr = copy.deepcopy(base)
    lr["run_id"] = "rule-lr-policy"
    lr["declaration"]["hyper_parameters"]["lr_policy"] = "linear_scaling_warmup_step"
    lr["declaration"]["hyper_parameters"]["lr_warmup_epochs"] = 10
    asy = copy.deepcopy(base)
    asy["run_id"] = "rule-async-sgd"
    asy["declaration"]["programming_model"]["sync_mode"] = "asynchronous"
    write("rules/bn_weight_decay_change.json", bn)
    write("rules/lr_policy_change.json", lr)
    write("rules/async_sgd.json", asy)

    # Batch-norm weight decay study: equal throughput, accuracy shifted by the gain.
    study = []
    comparisons = []
    for scale, base_q, gain in ((16, 0.763, 0.0045), (32, 0.763, 0.0045), (64, 0.720, 0.0138)):
        for tag, q in (("wd", base_q), ("nowd", round(base_q + gain, 4))):
            r = make_run(IC, IC_DECL, f"bn-{tag}-{scale:02d}", "fp32", scale, 7e12, q, None, rng, 90,
                         IC["dataset_samples"])
            r["achieved_quality"] = q
            r["level"] = "free"
            if tag == "nowd":
                r["declaration"]["hyper_parameters"]["bn_weight_decay"] = "disabled"
            study.append(r)
        comparisons.append({"label": f"{scale} GPUs", "baseline_run": f"bn-wd-{scale:02d}",
                            "variant_run": f"bn-nowd-{scale:02d}"})
    write("studies/bn_weight_decay/runs.json", study)
    write("studies/bn_weight_decay/comparisons.json", comparisons)

    bad = copy.deepcopy(base)
    bad["run_id"] = "bad-quality"
    bad["achieved_quality"] = 1.5
    write("invalid/quality_above_one.json", bad)

    write("scenarios/image_classification_sweep.json", {
        "system": "../systems/v100_cluster.json",
        "workload": "../workloads/image_classification.json",
        "sweep": [8, 16, 32, 64],
        "options": {"precision": "fp32", "per_rank_batch": 32, "baseline_scale": 8, "overlap_alpha": 0.8,
                    "compute_efficiency": 0.48, "achieved_quality": 0.763, "negotiation_skew": 0.0005,
                    "tensors_per_step": 16, "skew_seed": 7,
                    "topology": {"kind": "ring", "per_message_latency": 5e-6}},
    })
    write("scenarios/extreme_weather_analytics_sweep.json", {
        "system": "../systems/v100_cluster.json",
        "workload": "../workloads/extreme_weather_analytics.json",
        "sweep": [8, 16, 32, 64],
        "options": {"precision": "fp32", "per_rank_batch": 1, "baseline_scale": 8, "overlap_alpha": 0.3,
                    "compute_efficiency": 0.4, "achieved_quality": 0.35, "negotiation_skew": 0.002,
                    "tensors_per_step": 64, "skew_seed": 7,
                    "topology": {"kind": "ring", "per_message_latency": 5e-6}},
    })

    write("roofline/single_node_ceilings.json", [
        {"name": "mixed_gemm", "kind": "computation", "value": 636e12, "precision": "mixed"},
        {"name": "mixed_conv", "kind": "computation", "value": 176e12, "precision": "mixed"},
        {"name": "fp32_gemm", "kind": "computation", "value": 115e12, "precision": "fp32"},
        {"name": "fp32_conv", "kind": "computation", "value": 112e12, "precision": "fp32"},
        {"name": "memory", "kind": "communication", "value": 1134e9},
    ])
    write("roofline/distributed_ceilings.json", [
        {"name": "mixed_gemm", "kind": "computation", "value": 5091e12, "precision": "mixed"},
        {"name": "mixed_conv", "kind": "computation", "value": 2376e12, "precision": "mixed"},
        {"name": "fp32_conv", "kind": "computation", "value": 976e12, "precision": "fp32"},
        {"name": "fp32_gemm", "kind": "computation", "value": 920e12, "precision": "fp32"},
        {"name": "nvlink", "kind": "communication", "value": 300e9},
    ])

    def point(label, workload, ranks, attained=None):
        message = workload["comm_per_step"] * workload["bytes_per_param"]
        p = {"label": label, "flops_total": workload["comp_per_step"] * ranks,
             "comm_traffic": 2 * (ranks - 1) * message, "precision": "fp32"}
        if attained is not None:
            p["attained"] = attained
        return p

    write("roofline/case_study_points.json", [
        point("ewa-16", EWA, 16, 25.99e12),
        point("ic-16", IC, 16),
        point("ic-32", IC, 32),
        point("ic-64", IC, 64, 345e12),
    ])


if __name__ == "__main__":
    main()
