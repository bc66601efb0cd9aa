"""Dataset serialization: canonical JSONL records, answers and metrics files.

Records are written with sorted keys and no extra whitespace so a
load/save round trip is byte-identical, which lets dataset files be
content-addressed by sha256.
"""
from __future__ import annotations

import hashlib
import json
from pathlib import Path
from typing import Iterable

from .calculus import ViewFrame, relation_from_token, relation_token
from .netgen import BenchmarkInstance, GenConfig, QType, QuerySpec, Setting
from .network import Binary, ConstraintNetwork, Unary

SCHEMA_VERSION = 1
ROOM_TOKEN = "room"  # reference slot used by unary (object-vs-room) constraints


def instance_to_record(inst: BenchmarkInstance) -> dict:
    cfg = inst.config
    constraints = [[u.obj, relation_token(u.rel), ROOM_TOKEN] for u in inst.network.unary]
    constraints += [
        [b.subject, relation_token(b.rel), b.reference] for b in inst.network.binary
    ]
    gold: dict[str, object] = {
        "coords": {k: list(v) for k, v in sorted(inst.gold_coords.items())},
        "fr_direction": inst.gold_direction.value,
    }
    if inst.query.qtype is QType.YN:
        gold["yn_label"] = inst.query.label
        gold["yn_candidate"] = inst.query.candidate.value
    return {
        "schema_version": SCHEMA_VERSION,
        "id": inst.id,
        "room_id": inst.room_id,
        "room_type": inst.room_type,
        "w": inst.network.w,
        "seed": inst.seed,
        "config": {
            "n": cfg.n,
            "d": cfg.d,
            "m": cfg.m,
            "setting": cfg.setting.value,
            "view": cfg.view.value,
            "qtype": cfg.qtype.value,
            "eps_frac": cfg.eps_frac,
        },
        "objects": list(inst.network.variables),
        "query": {"subject": inst.query.subject, "reference": inst.query.reference},
        "constraints": constraints,
        "story": inst.story,
        "question": inst.question,
        "gold": gold,
    }


def record_to_instance(rec: dict) -> BenchmarkInstance:
    from .calculus import Direction9

    cfg = GenConfig(
        n=rec["config"]["n"],
        d=rec["config"]["d"],
        m=rec["config"]["m"],
        setting=Setting(rec["config"]["setting"]),
        view=ViewFrame(rec["config"]["view"]),
        qtype=QType(rec["config"]["qtype"]),
        w=rec["w"],
        eps_frac=rec["config"]["eps_frac"],
    )
    unary: list[Unary] = []
    binary: list[Binary] = []
    for subj, token, ref in rec["constraints"]:
        rel = relation_from_token(token)
        if ref == ROOM_TOKEN:
            unary.append(Unary(subj, rel))
        else:
            binary.append(Binary(subj, rel, ref))
    network = ConstraintNetwork(
        variables=tuple(rec["objects"]),
        unary=tuple(unary),
        binary=tuple(binary),
        s=cfg.s,
        w=rec["w"],
    )
    gold = rec["gold"]
    query = QuerySpec(
        subject=rec["query"]["subject"],
        reference=rec["query"]["reference"],
        qtype=cfg.qtype,
        candidate=Direction9(gold["yn_candidate"]) if "yn_candidate" in gold else None,
        label=gold.get("yn_label"),
    )
    return BenchmarkInstance(
        id=rec["id"],
        room_id=rec["room_id"],
        room_type=rec["room_type"],
        seed=rec["seed"],
        config=cfg,
        network=network,
        query=query,
        story=rec["story"],
        question=rec["question"],
        gold_coords={k: tuple(v) for k, v in gold["coords"].items()},
        gold_direction=Direction9(gold["fr_direction"]),
    )


def dumps_record(rec: dict) -> str:
    return json.dumps(rec, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def write_dataset(path: str | Path, instances: Iterable[BenchmarkInstance]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as fh:
        for inst in instances:
            fh.write(dumps_record(instance_to_record(inst)) + "\n")


def read_dataset(path: str | Path) -> list[BenchmarkInstance]:
    return [record_to_instance(rec) for rec in read_records(path)]


def read_records(path: str | Path) -> list[dict]:
    records = []
    with Path(path).open("r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                records.append(json.loads(line))
    return records


def dataset_sha256(path: str | Path) -> str:
    digest = hashlib.sha256()
    with Path(path).open("rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def write_answers(path: str | Path, answers: Iterable[tuple[int, str]]) -> None:
    """Answers file: one ``{"id": ..., "text": ...}`` object per line."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as fh:
        for ans_id, text in answers:
            fh.write(dumps_record({"id": ans_id, "text": text}) + "\n")


def read_answers(path: str | Path) -> dict[int, str]:
    """Read an answers file; evaluation-record files are accepted too."""
    out: dict[int, str] = {}
    for rec in read_records(path):
        out[rec["id"]] = rec["text"] if "text" in rec else rec["reply"]
    return out


def write_eval_records(path: str | Path, records: Iterable) -> None:
    """Evaluation records: one JSON object per instance, dataset order."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as fh:
        for rec in records:
            payload = {
                "id": rec.instance_id,
                "prompt": rec.prompt,
                "reply": rec.reply,
                "parsed_yn": rec.parsed.yn,
                "parsed_direction": rec.parsed.direction.value if rec.parsed.direction else None,
                "latency": rec.latency,
                "retries": rec.retries,
                "error": rec.error,
            }
            fh.write(dumps_record(payload) + "\n")


def write_json(path: str | Path, payload: object) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
