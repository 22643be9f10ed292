"""Command-line interface.

Commands: gen-params, setup, sign, verify, demo-paper, attack, replay.
Exit codes: 0 success, 1 verification judged invalid, 2 usage error,
3 internal error (protocol abort, tampered transcript, mismatch).
Every command honors --format records for machine-parseable output.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from pathlib import Path
from typing import Optional

from . import analysis, demo
from .analysis import (
    STRATEGY_PICK_BOTH_FIRST,
    STRATEGY_PICK_COMMITMENT_FIRST,
    forgery_experiment,
    impersonation_experiment,
    tamper_experiment,
    wrong_key_recovery_experiment,
)
from .ctc import Ledger, OrgSetup, SignatureBundle, save_org_state, setup_organization
from .groupmath import (
    FULL_PROFILE,
    GroupParams,
    ParameterSearchError,
    TEST_PROFILE,
    generate_params,
    validate_params,
)
from .hashing import ChallengeHash, ScriptLookupError, load_script
from .protocol import (
    ProtocolAbort,
    SessionConfig,
    TranscriptError,
    replay_transcript,
    run_signing_session,
    run_verification_session,
)
from .records import append_jsonl, dec, format_record, read_json, undec, write_json
from .shares import Member


class UsageError(Exception):
    pass


def _emit(args, fields: dict) -> None:
    print(format_record(fields, args.format))


def _parse_ids(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(part) for part in text.split(",") if part.strip())
    except ValueError as exc:
        raise UsageError(f"bad id list {text!r}: {exc}") from exc


# ----------------------------------------------------------------------
# gen-params
# ----------------------------------------------------------------------

def cmd_gen_params(args) -> int:
    rng = random.Random(args.seed) if args.seed is not None else None
    if args.p is not None or args.q is not None:
        if args.p is None or args.q is None:
            raise UsageError("--p and --q must be given together")
        params = generate_params(TEST_PROFILE, rng, p=args.p, q=args.q, g=args.g)
    elif args.profile == TEST_PROFILE:
        if args.p_bits is None or args.q_bits is None:
            raise UsageError("profile 'test' needs --p/--q literals or --p-bits/--q-bits")
        params = generate_params(TEST_PROFILE, rng, p_bits=args.p_bits, q_bits=args.q_bits)
    else:
        params = generate_params(FULL_PROFILE, rng)
    report = validate_params(params)
    if args.out:
        write_json(args.out, params.to_record())
    _emit(args, {**params.to_record(), "valid": "true" if report.ok else "false"})
    return 0


# ----------------------------------------------------------------------
# setup
# ----------------------------------------------------------------------

def _draw_ids(rng: random.Random, count: int, q: int) -> list[int]:
    if count > q - 1:
        raise UsageError(f"cannot draw {count} distinct identities mod {q}")
    ids: set[int] = set()
    while len(ids) < count:
        ids.add(rng.randrange(1, q))
    return sorted(ids)


def cmd_setup(args) -> int:
    if args.demo_fixture:
        out = Path(args.out_dir)
        demo.write_deployment(out)
        _emit(args, {
            "out_dir": str(out),
            "y_S": "27",
            "y_R": "34",
            "W": "9",
            "signers": ",".join(map(str, demo.SIGNER_IDS)),
            "verifiers": ",".join(map(str, demo.VERIFIER_IDS)),
        })
        return 0
    if not args.params:
        raise UsageError("either --params or --demo-fixture is required")
    params = GroupParams.from_record(read_json(args.params))
    if not validate_params(params).ok:
        raise UsageError(f"parameter file {args.params} fails validation")
    if args.s_threshold > args.s_size or args.r_threshold > args.r_size:
        raise UsageError("threshold cannot exceed organization size")
    rng = random.Random(args.seed) if args.seed is not None else random.SystemRandom()
    q = params.q

    def build_org(org: str, size: int, threshold: int) -> tuple[dict[int, Member], OrgSetup]:
        members = {
            uid: Member.create(org, uid, rng.randrange(1, q), params)
            for uid in _draw_ids(rng, size, q)
        }
        setup = setup_organization(
            org, rng.randrange(1, q), threshold,
            [m.public_part() for m in members.values()],
            masking_nonce, params, rng,
        )
        return members, setup

    masking_nonce = rng.randrange(1, q)
    s_members, s_setup = build_org("S", args.s_size, args.s_threshold)
    r_members, r_setup = build_org("R", args.r_size, args.r_threshold)

    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    save_org_state(s_setup, out / "ctc_state_S.json")
    save_org_state(r_setup, out / "ctc_state_R.json")
    write_json(out / "members_S.json",
               {"org": "S", "members": [m.to_record() for m in s_members.values()]})
    write_json(out / "members_R.json",
               {"org": "R", "members": [m.to_record() for m in r_members.values()]})
    write_json(out / "public.json", {
        "params": params.to_record(),
        "orgs": {"S": s_setup.public.to_record(), "R": r_setup.public.to_record()},
    })

    if args.hash == "scripted":
        if not args.hash_script:
            raise UsageError("--hash scripted needs --hash-script")
        hash_record = load_script(args.hash_script).to_record()
    else:
        hash_record = {"mode": "production"}
    signer_ids = sorted(s_members)[: args.s_threshold]
    verifier_ids = sorted(r_members)[: args.r_threshold]
    write_json(out / "session.json", {
        "public": "public.json",
        "members_s": "members_S.json",
        "members_r": "members_R.json",
        "hash": hash_record,
        "signers": [dec(i) for i in signer_ids],
        "verifiers": [dec(i) for i in verifier_ids],
        "dc": dec(verifier_ids[0]),
        "seed": None,
    })

    _emit(args, {
        "out_dir": str(out),
        "y_S": dec(s_setup.public.org_public_key),
        "y_R": dec(r_setup.public.org_public_key),
        "W": dec(s_setup.public.unmask_base),
        "signers": ",".join(map(str, signer_ids)),
        "verifiers": ",".join(map(str, verifier_ids)),
    })
    return 0


# ----------------------------------------------------------------------
# sign / verify
# ----------------------------------------------------------------------

def _load_session(config_path: Path, message: bytes,
                  signers: Optional[tuple[int, ...]] = None,
                  verifiers: Optional[tuple[int, ...]] = None,
                  dc: Optional[int] = None,
                  seed: Optional[int] = None) -> SessionConfig:
    try:
        rec = read_json(config_path)
        base = config_path.parent
        public = read_json(base / rec["public"])
        from .ctc import OrgPublic

        params = GroupParams.from_record(public["params"])
        s_org = OrgPublic.from_record(public["orgs"]["S"])
        r_org = OrgPublic.from_record(public["orgs"]["R"])
        s_members = {
            undec(m["id"]): Member.from_record(m)
            for m in read_json(base / rec["members_s"])["members"]
        }
        r_members = {
            undec(m["id"]): Member.from_record(m)
            for m in read_json(base / rec["members_r"])["members"]
        }
        fixed = rec.get("fixed_nonces")
        return SessionConfig(
            params=params,
            challenge_hash=ChallengeHash.from_record(rec["hash"]),
            signer_org=s_org,
            recipient_org=r_org,
            signer_members=s_members,
            recipient_members=r_members,
            signer_ids=signers or tuple(undec(i) for i in rec["signers"]),
            verifier_ids=verifiers or tuple(undec(i) for i in rec["verifiers"]),
            dc_id=dc if dc is not None else undec(rec["dc"]),
            message=message,
            seed=seed if seed is not None else (undec(rec["seed"]) if rec["seed"] is not None else None),
            fixed_nonces=(
                {undec(k): (undec(v[0]), undec(v[1])) for k, v in fixed.items()}
                if fixed else None
            ),
        )
    except (KeyError, ValueError, json.JSONDecodeError) as exc:
        raise UsageError(f"bad session config {config_path}: {exc}") from exc


def _read_message(value: str) -> bytes:
    path = Path(value)
    if path.exists() and path.is_file():
        return path.read_bytes()
    return value.encode("utf-8")


def cmd_sign(args) -> int:
    config_path = Path(args.config)
    if not config_path.exists():
        raise UsageError(f"config file {config_path} does not exist")
    message = _read_message(args.message)
    config = _load_session(
        config_path, message,
        signers=_parse_ids(args.signers) if args.signers else None,
        seed=args.seed,
    )
    ledger_path = Path(args.ledger) if args.ledger else config_path.parent / "ledger.jsonl"
    ledger = Ledger.load(ledger_path) if ledger_path.exists() else Ledger()
    outcome = run_signing_session(config, ledger)
    append_jsonl(ledger_path, outcome.record.to_record())
    bundle_path = Path(args.out_bundle) if args.out_bundle else config_path.parent / "bundle.json"
    write_json(bundle_path, outcome.bundle.to_record())
    if args.transcript:
        outcome.transcript.write(args.transcript)
    _emit(args, {**outcome.bundle.to_record(), "bundle_file": str(bundle_path)})
    return 0


def cmd_verify(args) -> int:
    config_path = Path(args.config)
    bundle_path = Path(args.bundle)
    if not config_path.exists():
        raise UsageError(f"config file {config_path} does not exist")
    if not bundle_path.exists():
        raise UsageError(f"bundle file {bundle_path} does not exist")
    try:
        bundle = SignatureBundle.from_record(read_json(bundle_path))
    except (KeyError, ValueError, json.JSONDecodeError) as exc:
        raise UsageError(f"bad bundle file {bundle_path}: {exc}") from exc
    config = _load_session(
        config_path, bundle.message,
        verifiers=_parse_ids(args.verifiers) if args.verifiers else None,
        dc=args.dc,
    )
    outcome = run_verification_session(config, bundle)
    if args.transcript:
        outcome.transcript.write(args.transcript)
    _emit(args, outcome.verdict.to_record())
    return 0 if outcome.verdict.valid else 1


# ----------------------------------------------------------------------
# demo-paper
# ----------------------------------------------------------------------

def cmd_demo_paper(args) -> int:
    mismatches = demo.run_demo(out=sys.stdout)
    _emit(args, {
        "command": "demo-paper",
        "checks": dec(len(demo.EXPECTED)),
        "mismatches": dec(len(mismatches)),
    })
    if mismatches:
        print(f"demo-paper: first divergent value: {mismatches[0]}", file=sys.stderr)
        return 3
    return 0


# ----------------------------------------------------------------------
# attack
# ----------------------------------------------------------------------

_EXPERIMENTS = ("impersonation", "forgery-r-first", "forgery-both-first", "tamper", "wrong-key")


def cmd_attack(args) -> int:
    rng = random.Random(args.seed) if args.seed is not None else random.SystemRandom()
    production = ChallengeHash.production()
    config = demo.session_config(challenge_hash=production)
    names = _EXPERIMENTS if args.experiment == "all" else (args.experiment,)
    reports = []
    for name in names:
        if name == "impersonation":
            reports.append(impersonation_experiment(config, args.trials, rng))
            if args.controls:
                reports.append(impersonation_experiment(config, args.trials, rng, give_true_share=True))
        elif name == "forgery-r-first":
            reports.append(forgery_experiment(config, args.trials, rng, STRATEGY_PICK_COMMITMENT_FIRST))
            if args.controls:
                reports.append(forgery_experiment(
                    config, args.trials, rng, STRATEGY_PICK_COMMITMENT_FIRST,
                    signer_org_secret=demo.SENDER_POLYNOMIAL.secret,
                ))
        elif name == "forgery-both-first":
            reports.append(forgery_experiment(config, args.trials, rng, STRATEGY_PICK_BOTH_FIRST))
        elif name == "tamper":
            reports.append(tamper_experiment(config, args.trials, rng))
        elif name == "wrong-key":
            reports.append(wrong_key_recovery_experiment(config, args.trials, rng))
        else:
            raise UsageError(f"unknown experiment {name!r}")

    for report in reports:
        rec = report.to_record()
        rec["interval"] = f"{report.interval[0]}..{report.interval[1]}"
        rec["within_interval"] = "true" if report.within_interval else "false"
        _emit(args, rec)
    if args.out:
        from .records import write_jsonl

        write_jsonl(args.out, (r.to_record() for r in reports))
    if args.figures_dir:
        from .figures import render_experiment_figure, render_experiment_overview

        figures = Path(args.figures_dir)
        figures.mkdir(parents=True, exist_ok=True)
        for report in reports:
            render_experiment_figure(report, figures / f"{report.experiment}.png")
        render_experiment_overview(reports, figures / "overview.png")
    return 0


# ----------------------------------------------------------------------
# replay
# ----------------------------------------------------------------------

def cmd_replay(args) -> int:
    path = Path(args.transcript)
    if not path.exists():
        raise UsageError(f"transcript {path} does not exist")
    outcome = replay_transcript(path)
    fields = {"session": outcome.session, "replay": "match"}
    if outcome.bundle is not None:
        fields.update(outcome.bundle.to_record())
    if outcome.verdict is not None:
        fields.update(outcome.verdict.to_record())
    _emit(args, fields)
    return 0


# ----------------------------------------------------------------------
# parser
# ----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dualthreshold",
        description="Threshold-generated, threshold-verified signatures: simulator and tools.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_format(p):
        p.add_argument("--format", choices=("text", "records"), default="text",
                       help="output style; 'records' is one tab-separated record per line")

    p = sub.add_parser("gen-params", help="generate or validate group parameters")
    p.add_argument("--profile", choices=(FULL_PROFILE, TEST_PROFILE), default=FULL_PROFILE)
    p.add_argument("--p", type=int, help="test-profile prime modulus literal")
    p.add_argument("--q", type=int, help="test-profile subgroup order literal")
    p.add_argument("--g", type=int, help="test-profile generator literal (derived when absent)")
    p.add_argument("--p-bits", type=int, help="test-profile modulus size")
    p.add_argument("--q-bits", type=int, help="test-profile subgroup order size")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="write the parameter record to this path")
    add_format(p)
    p.set_defaults(func=cmd_gen_params)

    p = sub.add_parser("setup", help="create both organizations and a session config")
    p.add_argument("--params", help="parameter record from gen-params")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--demo-fixture", action="store_true",
                   help="write the bundled walkthrough deployment instead of sampling one")
    p.add_argument("--s-size", type=int, default=7)
    p.add_argument("--s-threshold", type=int, default=4)
    p.add_argument("--r-size", type=int, default=6)
    p.add_argument("--r-threshold", type=int, default=5)
    p.add_argument("--hash", choices=("production", "scripted"), default="production")
    p.add_argument("--hash-script", help="script file for scripted hash mode")
    p.add_argument("--seed", type=int)
    add_format(p)
    p.set_defaults(func=cmd_setup)

    p = sub.add_parser("sign", help="run a signing session")
    p.add_argument("--config", required=True, help="session config from setup")
    p.add_argument("--message", required=True, help="path to a message file, or a literal string")
    p.add_argument("--seed", type=int)
    p.add_argument("--signers", help="comma-separated signer subset override")
    p.add_argument("--out-bundle", help="bundle output path (default: bundle.json beside config)")
    p.add_argument("--transcript", help="write the full replayable transcript here")
    p.add_argument("--ledger", help="ledger file (default: ledger.jsonl beside config)")
    add_format(p)
    p.set_defaults(func=cmd_sign)

    p = sub.add_parser("verify", help="run a verification session on a bundle")
    p.add_argument("--config", required=True)
    p.add_argument("--bundle", required=True)
    p.add_argument("--verifiers", help="comma-separated verifier subset override")
    p.add_argument("--dc", type=int, help="designated combiner override")
    p.add_argument("--transcript", help="write the full replayable transcript here")
    add_format(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("demo-paper", help="replay the bundled walkthrough and check every value")
    add_format(p)
    p.set_defaults(func=cmd_demo_paper)

    p = sub.add_parser("attack", help="run the security experiments")
    p.add_argument("--experiment", choices=_EXPERIMENTS + ("all",), default="all")
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int)
    p.add_argument("--controls", action="store_true", help="also run control arms")
    p.add_argument("--figures-dir", help="render one PNG per report plus an overview here")
    p.add_argument("--out", help="write report records to this path")
    add_format(p)
    p.set_defaults(func=cmd_attack)

    p = sub.add_parser("replay", help="re-execute a transcript and check it matches")
    p.add_argument("--transcript", required=True)
    add_format(p)
    p.set_defaults(func=cmd_replay)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ProtocolAbort, TranscriptError, ParameterSearchError, ScriptLookupError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
