"""Command-line shell: CSV ingestion, configuration, and the three
commands (stationarity, fit, evaluate).

Reports are emitted as data only (JSON metrics, per-step trace CSV for
external plotting). Output is deterministic: identical config and input
produce byte-identical files, and no timestamps are embedded anywhere.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import numpy as np

from .arima import ArimaOrder, auto_order, fit_arima
from .errors import AgForecastError
from .evaluate import (
    ArmaGarchForecaster,
    DecompositionForecaster,
    LstmForecaster,
    StatFeatureForecaster,
    compare,
)
from .garch import GarchOrder, fit_arma_garch, garch_order_select
from .lstm import LstmConfig
from .series import TimeSeries, difference, train_test_split
from .stattests import adf_test, arch_lm_test, kpss_test, ljung_box_test

__all__ = ["RunConfig", "load_csv", "main"]

_MODEL_CHOICES = ("ag", "lstm", "ag-lstm", "lstm-garch")


@dataclass
class RunConfig:
    """Resolved run configuration. Precedence: CLI flags > config file > defaults."""

    input: str = ""
    date_col: str = "date"
    value_col: str = "open"
    split: float = 0.91
    subsets: tuple[int, ...] = (7, 14, 21)
    p_max: int = 5
    q_max: int = 5
    d_max: int = 2
    garch_p_max: int = 2
    garch_q_max: int = 2
    order: str = ""
    garch: str = ""
    lookback: int = 10
    hidden: int = 32
    epochs: int = 300
    lr: float = 0.01
    grad_clip: float = 5.0
    seed: int = 0
    models: tuple[str, ...] = _MODEL_CHOICES
    out: str = "out"

    def validate(self):
        if not self.input:
            raise ValueError("an input CSV path is required")
        if not 0.0 < self.split < 1.0:
            raise ValueError(f"split must be in (0, 1), got {self.split}")
        if len(self.subsets) == 0 or any(b <= a for a, b in zip(self.subsets, self.subsets[1:])):
            raise ValueError(f"subsets must be strictly increasing, got {list(self.subsets)}")
        for m in self.models:
            if m not in _MODEL_CHOICES:
                raise ValueError(f"unknown model {m!r}; choose from {list(_MODEL_CHOICES)}")
        if len(self.models) == 0:
            raise ValueError("at least one model is required")
        for name in ("p_max", "q_max", "d_max", "garch_p_max", "garch_q_max",
                     "lookback", "hidden", "seed"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")
        if self.epochs < 0:
            raise ValueError("epochs must be non-negative")
        if self.lr <= 0 or self.grad_clip <= 0:
            raise ValueError("lr and grad_clip must be positive")

    def arima_order_or_none(self) -> ArimaOrder | None:
        if not self.order:
            return None
        parts = [int(v) for v in self.order.split(",")]
        if len(parts) != 3:
            raise ValueError(f"--order expects p,d,q, got {self.order!r}")
        return ArimaOrder(*parts)

    def garch_order_or_none(self) -> GarchOrder | None:
        if not self.garch:
            return None
        parts = [int(v) for v in self.garch.split(",")]
        if len(parts) != 2:
            raise ValueError(f"--garch expects P,Q, got {self.garch!r}")
        return GarchOrder(*parts)

    def lstm_config(self, input_dim: int) -> LstmConfig:
        return LstmConfig(input_dim=input_dim, hidden_size=self.hidden,
                          lookback_k=self.lookback, epochs=self.epochs,
                          learning_rate=self.lr, seed=self.seed,
                          grad_clip=self.grad_clip)

    def as_json_dict(self) -> dict:
        d = asdict(self)
        d["subsets"] = list(self.subsets)
        d["models"] = list(self.models)
        return d


_FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _parse_config_value(key: str, raw: str):
    if key in ("subsets",):
        return tuple(int(v) for v in raw.split(",") if v.strip())
    if key in ("models",):
        return tuple(v.strip() for v in raw.split(",") if v.strip())
    if key in ("split", "lr", "grad_clip"):
        return float(raw)
    if key in ("p_max", "q_max", "d_max", "garch_p_max", "garch_q_max",
               "lookback", "hidden", "epochs", "seed"):
        return int(raw)
    return raw


def _read_config_file(path: str) -> dict:
    entries = {}
    text = Path(path).read_text(encoding="utf-8")
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ValueError(f"{path}:{lineno}: expected key=value, got {line!r}")
        key, _, raw = stripped.partition("=")
        key = key.strip()
        raw = raw.strip()
        if key not in _FIELD_TYPES:
            raise ValueError(f"{path}:{lineno}: unknown config key {key!r}")
        entries[key] = _parse_config_value(key, raw)
    return entries


def resolve_config(args: argparse.Namespace) -> RunConfig:
    config = RunConfig()
    if getattr(args, "config", None):
        for key, value in _read_config_file(args.config).items():
            setattr(config, key, value)
    for f in fields(RunConfig):
        cli_value = getattr(args, f.name, None)
        if cli_value is not None:
            if f.name == "subsets":
                cli_value = tuple(int(v) for v in cli_value.split(","))
            elif f.name == "models":
                cli_value = tuple(v.strip() for v in cli_value.split(","))
            setattr(config, f.name, cli_value)
    config.validate()
    return config


def load_csv(path: str, date_column: str, value_column: str) -> TimeSeries:
    """Read an ordered series from a headered CSV file.

    Unparsable values fail hard with the offending physical line number;
    missing columns fail naming the columns that do exist.
    """
    p = Path(path)
    if not p.exists():
        raise ValueError(f"input file not found: {path}")
    with p.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise ValueError(f"{path} is empty (no header row)")
        header = [h.strip() for h in reader.fieldnames]
        for col in (date_column, value_column):
            if col not in header:
                raise ValueError(
                    f"column {col!r} not found in {path}; available columns: {header}"
                )
        dates = []
        values = []
        for lineno, row in enumerate(reader, start=2):
            raw = (row.get(value_column) or "").strip()
            try:
                values.append(float(raw))
            except ValueError:
                raise ValueError(
                    f"{path}: line {lineno}: cannot parse {value_column}={raw!r} as a number"
                ) from None
            dates.append((row.get(date_column) or "").strip())
    if not values:
        raise ValueError(f"{path} contains a header but no data rows")
    return TimeSeries(np.array(values), dates=tuple(dates), label=value_column)


def _test_result_dict(result) -> dict:
    return {
        "statistic": result.statistic,
        "p_value": result.p_value,
        "lags_used": result.lags_used,
        "null_hypothesis": result.null_hypothesis.value,
        "reject_at_5pct": result.reject_at_5pct,
    }


def _print_test(label: str, result) -> None:
    verdict = "reject" if result.reject_at_5pct else "accept"
    print(f"{label:28s} statistic={result.statistic:+10.4f}  "
          f"p={result.p_value:6.4f}  {verdict} null ({result.null_hypothesis.value})")


def cmd_stationarity(config: RunConfig) -> int:
    series = load_csv(config.input, config.date_col, config.value_col)
    diff1 = difference(series, 1)
    print(f"series: {config.input} ({len(series)} observations)")
    _print_test("ADF  level", adf_test(series))
    _print_test("KPSS level", kpss_test(series))
    _print_test("ADF  first difference", adf_test(diff1.values))
    _print_test("KPSS first difference", kpss_test(diff1.values))
    return 0


def _resolve_orders(config: RunConfig, train_series: TimeSeries):
    arima_order = config.arima_order_or_none()
    if arima_order is None:
        arima_order = auto_order(train_series, config.p_max, config.q_max, config.d_max)
    garch_order = config.garch_order_or_none()
    if garch_order is None:
        stage_one = fit_arima(train_series, arima_order)
        garch_order = garch_order_select(stage_one.residuals,
                                         config.garch_p_max, config.garch_q_max)
    return arima_order, garch_order


def cmd_fit(config: RunConfig) -> int:
    series = load_csv(config.input, config.date_col, config.value_col)
    arima_order, garch_order = _resolve_orders(config, series)
    model = fit_arma_garch(series, arima_order, garch_order)

    std_resid = model.arima.residuals.values / np.sqrt(model.h_series)
    lb_lag = min(10, len(std_resid) - 1)
    lb = ljung_box_test(std_resid, lag=max(lb_lag, arima_order.p + arima_order.q + 1),
                        fitted_params=arima_order.p + arima_order.q)
    lm = arch_lm_test(std_resid, lag=min(10, len(std_resid) - 3))

    doc = {
        "order": {"p": arima_order.p, "d": arima_order.d, "q": arima_order.q},
        "mu": model.arima.params.mu,
        "alphas": model.arima.params.alphas.tolist(),
        "thetas": model.arima.params.thetas.tolist(),
        "noise_variance": model.arima.params.noise_variance,
        "loglik": model.arima.loglik,
        "aic": model.arima.aic,
        "garch": {
            "order": {"P": garch_order.P, "Q": garch_order.Q},
            "w": model.garch_params.w,
            "lambdas": model.garch_params.lambdas.tolist(),
            "betas": model.garch_params.betas.tolist(),
            "loglik": model.garch_loglik,
            "aic": model.garch_aic,
        },
        "aic_total": model.aic_total,
        "diagnostics": {
            "ljung_box_standardized": _test_result_dict(lb),
            "arch_lm_standardized": _test_result_dict(lm),
        },
    }
    out_dir = Path(config.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    out_path = out_dir / "model.json"
    out_path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    print(f"fitted arima{arima_order}-garch{garch_order}  aic_total={model.aic_total:.4f}")
    _print_test("Ljung-Box (std. residuals)", lb)
    _print_test("ARCH-LM   (std. residuals)", lm)
    print(f"wrote {out_path}")
    return 0


def _build_roster(config: RunConfig, arima_order: ArimaOrder, garch_order: GarchOrder):
    roster = []
    for name in config.models:
        if name == "ag":
            roster.append(ArmaGarchForecaster(arima_order, garch_order, name=name))
        elif name == "lstm":
            roster.append(LstmForecaster(config.lstm_config(1), name=name))
        elif name == "ag-lstm":
            roster.append(DecompositionForecaster(arima_order, garch_order,
                                                  config.lstm_config(1), name=name))
        elif name == "lstm-garch":
            roster.append(StatFeatureForecaster(arima_order, garch_order,
                                                config.lstm_config(2), name=name))
    return roster


def _metrics_dict(report) -> dict:
    return {
        "mse": report.mse,
        "rmse": report.rmse,
        "mae": report.mae,
        "mape_percent": report.mape_percent,
        "n": report.n,
    }


def cmd_evaluate(config: RunConfig) -> int:
    series = load_csv(config.input, config.date_col, config.value_col)
    train_series, test_series = train_test_split(series, config.split)
    subsets = [s for s in config.subsets if s <= len(test_series)]
    if subsets != list(config.subsets):
        raise ValueError(
            f"subsets {list(config.subsets)} exceed the test length {len(test_series)}"
        )
    arima_order, garch_order = _resolve_orders(config, train_series)

    stage_one = fit_arima(train_series, arima_order)
    arch = arch_lm_test(stage_one.residuals, lag=min(10, len(stage_one.residuals) - 3))

    roster = _build_roster(config, arima_order, garch_order)
    report = compare(roster, train_series, test_series, subsets)

    resolved = config.as_json_dict()
    resolved["order"] = f"{arima_order.p},{arima_order.d},{arima_order.q}"
    resolved["garch"] = f"{garch_order.P},{garch_order.Q}"
    doc = {
        "config": resolved,
        "models": {
            name: {"subsets": {str(n): _metrics_dict(m) for n, m in per.items()}}
            for name, per in report.model_metrics.items()
        },
        "diagnostics": {
            "arch_lm_train_residuals": _test_result_dict(arch),
            "lag_one": {"subsets": {str(n): _metrics_dict(m)
                        for n, m in report.lag_one_metrics.items()}},
        },
    }

    out_dir = Path(config.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    report_path = out_dir / "report.json"
    report_path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n",
                           encoding="utf-8")

    trace_path = out_dir / "trace.csv"
    names = [m.name for m in roster]
    with trace_path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["index", "date", "actual"] + names + ["lag_one"])
        reference = report.traces[names[0]]
        for i, step in enumerate(reference.steps):
            row = [step.index, step.date if step.date is not None else "",
                   repr(step.actual)]
            for name in names:
                row.append(repr(report.traces[name].steps[i].predicted))
            row.append(repr(step.lag_one))
            writer.writerow(row)

    print(f"orders: arima{arima_order} garch{garch_order}   "
          f"train={len(train_series)} test={len(test_series)}")
    header = f"{'model':12s}" + "".join(f"{'n=' + str(n):>34s}" for n in subsets)
    print(header)
    print(f"{'':12s}" + "".join(f"{'mse':>12s}{'rmse':>8s}{'mae':>7s}{'mape%':>7s}"
                                for _ in subsets))
    for name in names:
        cells = ""
        for n in subsets:
            m = report.model_metrics[name][n]
            mape = f"{m.mape_percent:.2f}" if m.mape_percent is not None else "n/a"
            cells += f"{m.mse:12.4f}{m.rmse:8.3f}{m.mae:7.3f}{mape:>7s}"
        print(f"{name:12s}{cells}")
    print(f"wrote {report_path} and {trace_path}")
    return 0


def _add_common_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", help="flat key=value config file")
    sub.add_argument("--input", help="input CSV path")
    sub.add_argument("--date-col", dest="date_col", help="date column name")
    sub.add_argument("--value-col", dest="value_col", help="value column name")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="agforecast",
        description="Hybrid ARIMA-GARCH / LSTM one-step forecasting toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_stat = sub.add_parser("stationarity",
                            help="ADF and KPSS tests on the series and its first difference")
    _add_common_flags(p_stat)

    p_fit = sub.add_parser("fit", help="fit an ARIMA-GARCH model and write model JSON")
    _add_common_flags(p_fit)
    p_fit.add_argument("--order", help="explicit ARIMA order p,d,q (skips search)")
    p_fit.add_argument("--garch", help="explicit GARCH order P,Q (skips search)")
    for flag, name in [("--p-max", "p_max"), ("--q-max", "q_max"), ("--d-max", "d_max"),
                       ("--garch-p-max", "garch_p_max"), ("--garch-q-max", "garch_q_max")]:
        p_fit.add_argument(flag, dest=name, type=int)
    p_fit.add_argument("--out", help="output directory")

    p_eval = sub.add_parser("evaluate",
                            help="rolling one-step comparison of the model roster")
    _add_common_flags(p_eval)
    p_eval.add_argument("--split", type=float, help="training fraction (default 0.91)")
    p_eval.add_argument("--subsets", help="prefix subset lengths, e.g. 7,14,21")
    p_eval.add_argument("--order", help="explicit ARIMA order p,d,q")
    p_eval.add_argument("--garch", help="explicit GARCH order P,Q")
    for flag, name in [("--p-max", "p_max"), ("--q-max", "q_max"), ("--d-max", "d_max"),
                       ("--garch-p-max", "garch_p_max"), ("--garch-q-max", "garch_q_max")]:
        p_eval.add_argument(flag, dest=name, type=int)
    p_eval.add_argument("--lookback", type=int, help="LSTM lookback window k")
    p_eval.add_argument("--hidden", type=int, help="LSTM hidden size")
    p_eval.add_argument("--epochs", type=int, help="LSTM training epochs")
    p_eval.add_argument("--lr", type=float, help="LSTM learning rate")
    p_eval.add_argument("--seed", type=int, help="seed for all stochastic pieces")
    p_eval.add_argument("--models", help="comma list from: " + ",".join(_MODEL_CHOICES))
    p_eval.add_argument("--out", help="output directory")

    return parser


_COMMANDS = {
    "stationarity": cmd_stationarity,
    "fit": cmd_fit,
    "evaluate": cmd_evaluate,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = resolve_config(args)
        return _COMMANDS[args.command](config)
    except (AgForecastError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
