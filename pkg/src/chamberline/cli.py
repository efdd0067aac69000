"""Command-line front end: batch runs, UART math, waveform dump, live serve."""

from __future__ import annotations

import argparse
import os
import sys

from . import gateway, sim, uart, vitals

TEMP_TOLERANCE_DECI_C = 10
BPM_TOLERANCE = 3
LATENCY_BOUND_MS = 1200.0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="chamberline",
        description="Two-corner clinic kiosk simulator: patient queue, vitals, UART link.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="execute a scenario file and print the report")
    run.add_argument("scenario", help="path to a scenario text file")
    _add_config_args(run)
    run.add_argument("--json", action="store_true", help="emit the report as one JSON line")
    run.add_argument(
        "--assert", dest="check", action="store_true",
        help="exit 2 unless the report meets the headline tolerances",
    )

    calc = sub.add_parser("uart-calc", help="UBRR register, actual baud, and error table")
    calc.add_argument("--fosc", type=int, required=True, help="oscillator frequency in Hz")
    calc.add_argument("--baud", type=int, nargs="+", required=True, help="target baud(s)")
    calc.add_argument("--u2x", action="store_true", help="double-speed mode")

    synth = sub.add_parser("synth-ppg", help="dump a synthetic pulse waveform as CSV")
    synth.add_argument("--bpm", type=int, required=True)
    synth.add_argument("--duration", type=int, default=10000, help="milliseconds")
    synth.add_argument("--fs", type=int, default=100, help="sample rate in Hz")
    synth.add_argument("--noise", type=float, default=0.0, help="noise fraction 0..1")
    synth.add_argument("--seed", type=int, default=0)

    serve = sub.add_parser("serve", help="run the live gateway")
    serve.add_argument("--port", type=int, default=7870)
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--start-paused", action="store_true")
    _add_config_args(serve)

    return parser


def _add_config_args(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--fosc", type=int, default=8_000_000, help="oscillator frequency in Hz")
    sub.add_argument("--baud", type=int, default=9600, help="target baud")
    sub.add_argument("--u2x", action="store_true", help="double-speed UART")
    sub.add_argument("--vref", type=int, default=5000, help="ADC reference in mV")
    sub.add_argument("--capacity", type=int, default=64, help="queue slots")
    sub.add_argument("--seed", type=int, default=0, help="noise generator seed")


def _config_from(args: argparse.Namespace) -> sim.SimConfig:
    return sim.SimConfig(
        f_osc_hz=args.fosc,
        target_baud=args.baud,
        u2x=args.u2x,
        vref_mv=args.vref,
        capacity=args.capacity,
        seed=args.seed,
    )


def _cmd_run(args: argparse.Namespace) -> int:
    try:
        with open(args.scenario, encoding="utf-8") as handle:
            scenario = sim.load_scenario(handle.read())
    except OSError as exc:
        print(f"cannot read scenario: {exc}", file=sys.stderr)
        return 1
    except sim.ParseError as exc:
        print(f"scenario error: {exc}", file=sys.stderr)
        return 1

    report, log = sim.run(scenario, _config_from(args))
    if args.json:
        print(report.to_json())
    else:
        for line in log:
            print(line)
        print()
        print(sim.report_table(report))

    if args.check:
        failures = []
        if (
            report.max_abs_temp_error_deci_c is not None
            and report.max_abs_temp_error_deci_c > TEMP_TOLERANCE_DECI_C
        ):
            failures.append(
                f"temperature error {report.max_abs_temp_error_deci_c} deci-C"
                f" > {TEMP_TOLERANCE_DECI_C}"
            )
        if report.max_abs_bpm_error is not None and report.max_abs_bpm_error > BPM_TOLERANCE:
            failures.append(f"bpm error {report.max_abs_bpm_error} > {BPM_TOLERANCE}")
        if report.max_latency_ms is not None and report.max_latency_ms >= LATENCY_BOUND_MS:
            failures.append(f"latency {report.max_latency_ms:.1f} ms >= {LATENCY_BOUND_MS}")
        if report.uart_error_pct is not None and abs(report.uart_error_pct) > uart.USABLE_ERROR_PCT:
            failures.append(f"uart error {report.uart_error_pct:+.2f}% outside +/-2%")
        if failures:
            for failure in failures:
                print(f"ASSERT FAIL: {failure}", file=sys.stderr)
            return 2
    return 0


def _cmd_uart_calc(args: argparse.Namespace) -> int:
    print(f"{'f_osc':>9}  {'baud':>7}  {'u2x':>3}  {'ubrr':>4}  {'actual':>10}  {'error':>8}")
    for baud in args.baud:
        mode = "on" if args.u2x else "off"
        try:
            ubrr = uart.ubrr_for(args.fosc, baud, args.u2x)
            actual = uart.actual_baud(args.fosc, ubrr, args.u2x)
            error = 100.0 * (actual - baud) / baud
            print(
                f"{args.fosc:>9}  {baud:>7}  {mode:>3}  {ubrr:>4}  {actual:>10.2f}  {error:>+7.2f}%"
            )
        except uart.BaudUnreachable:
            print(f"{args.fosc:>9}  {baud:>7}  {mode:>3}  {'--':>4}  {'--':>10}  {'n/a':>8}")
    return 0


def _cmd_synth_ppg(args: argparse.Namespace) -> int:
    wave = vitals.synth_ppg(args.bpm, args.duration, args.fs, args.noise, args.seed)
    for t_ms, value in wave:
        print(f"{t_ms},{value}")
    return 0


def _cmd_serve(args: argparse.Namespace) -> int:
    port = args.port
    env_port = os.environ.get("CHAMBERLINE_PORT")
    if env_port:
        try:
            port = int(env_port)
        except ValueError:
            print(f"ignoring bad CHAMBERLINE_PORT={env_port!r}", file=sys.stderr)
    gateway.serve(
        _config_from(args), host=args.host, port=port, start_paused=args.start_paused
    )
    return 0


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "run":
        return _cmd_run(args)
    if args.command == "uart-calc":
        return _cmd_uart_calc(args)
    if args.command == "synth-ppg":
        return _cmd_synth_ppg(args)
    return _cmd_serve(args)


if __name__ == "__main__":
    sys.exit(main())
