"""HTTP front end over the oscillator library.

All numeric failure modes surface as HTTP 422 with a human-readable detail
string naming the offending field; computations that complete but contain
invalid samples return 200 with the validity masks set, and the client
decides how to treat them.
"""
from __future__ import annotations

import math

import numpy as np
from fastapi import FastAPI, HTTPException

from .. import __version__, approx, equiv, fdm, ml_series, response
from ..core import OscillatorParams, ParameterError, TimeSeries, linspace_grid
from ..specfun import DomainError
from . import schemas

app = FastAPI(title="fracosc", version=__version__)


def _params(body: schemas.OscillatorIn) -> OscillatorParams:
    try:
        return OscillatorParams(omega_n=body.omega_n, zeta=body.zeta, beta=body.beta)
    except ParameterError as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from exc


def _signal_out(ts: TimeSeries) -> schemas.SignalOut:
    return schemas.SignalOut(
        x=[v if math.isfinite(v) else 0.0 for v in ts.values.tolist()],
        valid=ts.valid.tolist(),
    )


def _impulse_naive_grid(p: OscillatorParams, grid) -> TimeSeries:
    values = np.empty(grid.n)
    valid = np.empty(grid.n, dtype=bool)
    for i, t in enumerate(grid.times()):
        ev = ml_series.impulse_series(p, float(t), naive=True)
        values[i] = ev.value if math.isfinite(ev.value) else 0.0
        valid[i] = ev.valid
    return TimeSeries(grid=grid, values=values, unit="s", valid=valid)


@app.get("/health")
def health() -> dict:
    return {"status": "ok", "version": __version__}


@app.post("/impulse", response_model=schemas.ImpulseResponse)
def impulse(body: schemas.ImpulseRequest) -> schemas.ImpulseResponse:
    p = _params(body)
    grid = linspace_grid(body.t_end, body.n)
    wanted = ["series", "approx", "fdm"] if body.method == "all" else [body.method]
    methods: dict[str, schemas.SignalOut] = {}
    series_ts: TimeSeries | None = None
    try:
        for m in wanted:
            if m == "series":
                series_ts = (
                    _impulse_naive_grid(p, grid)
                    if body.naive
                    else ml_series.impulse_series_grid(p, grid)
                )
                methods[m] = _signal_out(series_ts)
            elif m == "approx":
                vals = approx.impulse_approx_grid(p, grid.times())
                methods[m] = _signal_out(TimeSeries(grid=grid, values=vals, unit="s"))
            else:
                methods[m] = _signal_out(fdm.impulse_fdm(p, grid))
    except (DomainError, fdm.FdmInstabilityError) as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from exc
    residual = None
    if body.method == "all":
        ser = methods["series"]
        app_x = methods["approx"].x
        residual = [
            (s - a) if ok else None for s, a, ok in zip(ser.x, app_x, ser.valid)
        ]
    if series_ts is not None:
        valid_until = series_ts.valid_until()
    else:
        valid_until = grid.t_end
    return schemas.ImpulseResponse(
        t=grid.times().tolist(),
        methods=methods,
        residual=residual,
        valid_until=valid_until,
    )


@app.post("/frf", response_model=schemas.FrfResponse)
def frf(body: schemas.FrfRequest) -> schemas.FrfResponse:
    p = _params(body)
    try:
        exact = approx.frf_curve(p, "exact", body.g_max, body.n)
        appr = approx.frf_curve(p, "approx", body.g_max, body.n)
    except DomainError as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from exc

    def col(a: np.ndarray, masked: np.ndarray) -> list[float | None]:
        return [None if m else float(v) for v, m in zip(a, masked)]

    return schemas.FrfResponse(
        g=exact.g.tolist(),
        mag_exact=col(exact.mag, exact.masked),
        mag_approx=col(appr.mag, appr.masked),
        phase_exact=col(exact.phase, exact.masked),
        phase_approx=col(appr.phase, appr.masked),
    )


@app.post("/fit", response_model=schemas.FitResponse)
def fit(body: schemas.FitRequest) -> schemas.FitResponse:
    sampler = (
        equiv.sample_y_beta if body.target == "omega-d" else equiv.sample_zeta_ratio
    )
    samples, n_failed = sampler(body.samples, seed=body.seed, jobs=body.jobs)
    try:
        result = equiv.fit_power_law(samples)
    except (DomainError, RuntimeError) as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from exc
    return schemas.FitResponse(
        target=body.target,
        a0=result.a0,
        a1=result.a1,
        ci95_a0=result.ci95_a0,
        ci95_a1=result.ci95_a1,
        rmse=result.rmse,
        n_samples=result.n_samples,
        n_failed=n_failed,
        scatter_beta=[s[0] for s in samples],
        scatter_y=[s[1] for s in samples],
    )


@app.post("/respond", response_model=schemas.RespondResponse)
def respond(body: schemas.RespondRequest) -> schemas.RespondResponse:
    if (body.case is None) == (body.scenario is None):
        raise HTTPException(
            status_code=422, detail="provide exactly one of 'case' or 'scenario'"
        )
    try:
        if body.case is not None:
            report = response.run_case(body.case, t_end=body.t_end, n=body.n)
        else:
            sc = body.scenario
            p = _params(sc)
            grid = linspace_grid(sc.t_end, sc.n)
            h = response.Excitation(
                kind=sc.excitation.kind,
                amplitude=sc.excitation.amplitude,
                frequency=sc.excitation.frequency,
            )
            report = response.run_scenario(p, h, grid)
    except (DomainError, ParameterError, fdm.FdmInstabilityError) as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from exc
    rmax = report.residual_max if math.isfinite(report.residual_max) else None
    rrel = report.residual_rel if math.isfinite(report.residual_rel) else None
    return schemas.RespondResponse(
        case_id=report.case_id,
        t=report.series.times().tolist(),
        series=_signal_out(report.series),
        approx=_signal_out(report.approx),
        fdm=_signal_out(report.fdm) if report.fdm is not None else None,
        residual_max=rmax,
        residual_rel=rrel,
        valid_until=report.valid_until,
    )
