"""Command-line front end.

    brhbc sweep     --config reference_body.cfg --out gain.csv
    brhbc capacity  --config reference_body.cfg [--band 30e6,300e6]
    brhbc safety    --config reference_body.cfg
    brhbc leakage   --config reference_body.cfg --out leakage.csv
    brhbc calibrate --config reference_body.cfg
    brhbc oracle

``--config`` also accepts the name of a bundled config (``reference_body.cfg``,
``copper_cylinder.cfg``, ``thick_cylinder.cfg``). CSV goes to ``--out`` (or
stdout); the JSON companion document, which embeds the full config echo, goes
next to it with a ``.json`` suffix (or to stdout for JSON-only commands).
``BRHBC_WORKERS`` sets the number of sweep worker threads.
"""

from __future__ import annotations

import argparse
import json
import sys
import warnings
from dataclasses import replace
from pathlib import Path

import numpy as np

from .bodyline import NetworkError
from .calibration import (
    CalibrationError,
    CorrectionFactors,
    calibrated_gain,
    fit_body_ground_capacitance,
    ingest_sweep,
    load_correction,
)
from .channel import (
    MIN_FEATURE_POINTS,
    AirPath,
    ChannelError,
    dominant_peaks,
    energy_per_bit,
    find_features,
    shannon_capacity,
    superpose_air_path,
    sweep_gain,
)
from .dielectrics import DielectricError
from .leakage import LeakageError, offbody_profile, receiver_pickup
from .oracles import run_all
from .safety import SafetyError, default_limits, exposure_estimate, load_limits, modeled_tx_power
from .scenario import ConfigError, Scenario, bundled_config, load_scenario


class CommandError(Exception):
    pass


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.floating, float)):
        return float(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    if isinstance(x, complex):
        return {"re": x.real, "im": x.imag}
    return x


def _dump_json(doc) -> str:
    return json.dumps(_jsonable(doc), indent=2) + "\n"


def _parse_band(text: str):
    try:
        lo, hi = (float(v) for v in text.split(","))
    except ValueError:
        raise CommandError(f"--band expects 'low,high' in Hz, got {text!r}") from None
    if not hi > lo:
        raise CommandError("empty band")
    return lo, hi


def _load(args) -> Scenario:
    if args.config is None:
        raise ConfigError("--config is required")
    p = Path(args.config)
    if not p.exists() and p.parent == Path("."):
        try:
            p = bundled_config(p.name)
        except ConfigError:
            pass
    scn = load_scenario(p)
    if args.segments is not None:
        if args.segments < 1:
            raise ConfigError("--segments must be >= 1")
        scn.channel = scn.channel.with_model(n_segments=args.segments)
    if args.points is not None:
        scn.sweep = replace(scn.sweep, points=args.points)
    return scn


def _response(scn: Scenario, sweep=None):
    resp = sweep_gain(scn.channel, sweep or scn.sweep, v_in=scn.v_in)
    if scn.air_path.enabled:
        ch = scn.channel
        air = AirPath(scn.air_path.los_distance, scn.air_path.eps_eff, ch.dev_tx.plate_separation,
                      ch.dev_rx.plate_separation, receiver_pickup(ch.dev_rx, ch.termination))
        resp = superpose_air_path(resp, air, scn.air_path.scale)
    return resp


def _feature_doc(s):
    return {"kind": s.kind, "f_c_hz": s.f_c, "gain_db": s.gain_db, "q": s.q,
            "bandwidth_hz": s.bandwidth, "prominence_db": s.prominence_db}


def _peak_frequency(scn: Scenario) -> float:
    resp = _response(scn)
    if resp.frequencies.size < MIN_FEATURE_POINTS:
        raise CommandError(f"need >= {MIN_FEATURE_POINTS} sweep points to locate the peak")
    peaks = dominant_peaks(find_features(resp))
    if not peaks:
        raise CommandError("no resonance peak in the sweep; set an explicit frequency")
    return max(peaks, key=lambda s: s.gain_db).f_c


def _emit(args, csv_text, doc):
    """Write outputs only after everything has been computed."""
    if args.out:
        out = Path(args.out)
        if csv_text is not None:
            out.write_text(csv_text)
            out.with_suffix(".json").write_text(_dump_json(doc))
        else:
            out.write_text(_dump_json(doc))
    else:
        sys.stdout.write(csv_text if csv_text is not None else _dump_json(doc))


def cmd_sweep(args) -> int:
    scn = _load(args)
    sweep = scn.sweep
    if args.band:
        lo, hi = _parse_band(args.band)
        sweep = replace(sweep, f_start=lo, f_stop=hi)
    resp = _response(scn, sweep)
    doc = {"command": "sweep", "config": scn.echo(), "v_in": scn.v_in}
    if resp.frequencies.size < MIN_FEATURE_POINTS:
        msg = (f"{resp.frequencies.size} sweep points is below the feature-detection minimum "
               f"of {MIN_FEATURE_POINTS}; features skipped")
        print(f"warning: {msg}", file=sys.stderr)
        doc["features"] = None
        doc["warning"] = msg
    else:
        feats = find_features(resp)
        dom = dominant_peaks(feats)
        doc["features"] = [_feature_doc(s) for s in feats]
        doc["dominant_peaks"] = [_feature_doc(s) for s in dom]
        if dom:
            top = max(dom, key=lambda s: s.gain_db)
            print(f"dominant peaks: {len(dom)}; strongest at {top.f_c / 1e6:.2f} MHz "
                  f"({top.gain_db:.2f} dB, Q={top.q:.2f})", file=sys.stderr)
    if resp.meta.get("air_path"):
        doc["air_path"] = resp.meta["air_path"]
    _emit(args, resp.to_csv(), doc)
    return 0


def cmd_capacity(args) -> int:
    scn = _load(args)
    band = _parse_band(args.band) if args.band else scn.capacity.band
    resp = _response(scn)
    rep = shannon_capacity(resp, scn.noise, scn.capacity.tx_power_dbm, band,
                           scn.capacity.reference_band, scn.capacity.psd_bandwidth_hz)
    doc = {"command": "capacity", "config": scn.echo(), "capacity": rep.as_dict()}
    if rep.capacity_bits_per_s > 0:
        p_tx = 10 ** (scn.capacity.tx_power_dbm / 10) * 1e-3
        doc["energy_per_bit_j"] = energy_per_bit(p_tx, rep.capacity_bits_per_s)
    print(f"capacity {rep.capacity_bits_per_s:.4e} bit/s in [{band[0]:g}, {band[1]:g}] Hz; "
          f"ratio to reference band {rep.comparison_ratio:.2f}", file=sys.stderr)
    _emit(args, None, doc)
    return 0


def cmd_safety(args) -> int:
    scn = _load(args)
    f = scn.safety.frequency or _peak_frequency(scn)
    limits = (load_limits(Path(scn.safety.limits_file).read_text(), scn.safety.sar_limit)
              if scn.safety.limits_file else default_limits(scn.safety.sar_limit))
    rep = exposure_estimate(scn.channel, f, scn.v_in, limits, scn.safety.density)
    p_tx = modeled_tx_power(scn.channel, f, scn.v_in, scn.safety.sense_resistance)
    doc = {"command": "safety", "config": scn.echo(), "exposure": rep.as_dict(), "tx_power_w": p_tx}
    me, mh, ms = rep.margins
    print(f"{f / 1e6:.2f} MHz: margins E {me:.1f}x, H {mh:.1f}x, SAR {ms:.1f}x; "
          f"{'safe' if rep.safe else 'NOT safe'}", file=sys.stderr)
    _emit(args, None, doc)
    return 0


def cmd_leakage(args) -> int:
    scn = _load(args)
    f = scn.leakage.frequency or _peak_frequency(scn)
    prof = offbody_profile(scn.channel, f, scn.leakage.distances, scn.v_in,
                           onbody_length=scn.leakage.onbody_length)
    doc = {
        "command": "leakage",
        "config": scn.echo(),
        "frequency_hz": f,
        "v_on_volts": prof.v_on,
        "moment_a_m": {"re": prof.moment.real, "im": prof.moment.imag},
        "radiation_zone_radius_m": prof.r_d,
        **prof.meta,
    }
    i = np.searchsorted(prof.distances, 0.5)
    if i < prof.distances.size and prof.distances[i] == 0.5:
        print(f"V_off/V_on at 0.5 m: {prof.ratio[i]:.4f}", file=sys.stderr)
    _emit(args, prof.to_csv(), doc)
    return 0


def cmd_calibrate(args) -> int:
    scn = _load(args)
    cal = scn.calibration
    if not cal.measurement:
        raise ConfigError("[calibration] measurement: missing required key")

    def read(p, what):
        try:
            return Path(p).read_text()
        except OSError as exc:
            raise ConfigError(f"[calibration] {what}: cannot read {p!r}: {exc.strerror}") from None

    recs = ingest_sweep(read(cal.measurement, "measurement"))
    corr = CorrectionFactors(
        cal.tx_offset_db,
        load_correction(read(cal.rx_offset, "rx_offset")) if cal.rx_offset else None,
        load_correction(read(cal.buffer_offset, "buffer_offset")) if cal.buffer_offset else None,
    )
    band = _parse_band(args.band) if args.band else cal.band
    meas = calibrated_gain(recs, corr)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        fit = fit_body_ground_capacitance(meas, scn.channel, band)
    doc = {
        "command": "calibrate",
        "config": scn.echo(),
        "fit": {
            "c_b_f": fit.c_b,
            "residual_db": fit.residual_db,
            "identifiable": fit.identifiable,
            "converged": fit.converged,
            "iterations": fit.iterations,
            "message": fit.message,
        },
        "calibrated": {"frequency_hz": list(meas.frequencies), "gain_db": list(meas.gain_db)},
    }
    print(f"fitted C_B = {fit.c_b * 1e12:.2f} pF (rms residual {fit.residual_db:.3f} dB)")
    if not fit.identifiable:
        print(f"warning: {fit.message}", file=sys.stderr)
    if args.out:
        Path(args.out).write_text(_dump_json(doc))
    return 0 if fit.converged else 1


def cmd_oracle(args) -> int:
    results = run_all()
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'}  {r.name}: {r.detail}")
    return 0 if all(r.passed for r in results) else 1


COMMANDS = {
    "sweep": cmd_sweep,
    "capacity": cmd_capacity,
    "safety": cmd_safety,
    "leakage": cmd_leakage,
    "calibrate": cmd_calibrate,
    "oracle": cmd_oracle,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="brhbc", description="Body-resonance HBC channel toolkit")
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--config", help="scenario file (or name of a bundled config)")
        s.add_argument("--out", help="output file (CSV, with a .json companion, or JSON)")
        s.add_argument("--points", type=int, help="override the number of sweep points")
        s.add_argument("--band", help="frequency band 'low,high' in Hz")
        s.add_argument("--segments", type=int, help="override the number of path cells")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"error: config: {exc}", file=sys.stderr)
        return 2
    except (CommandError, ChannelError, NetworkError, SafetyError, LeakageError, CalibrationError,
            DielectricError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
