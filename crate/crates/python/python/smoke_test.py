"""Quick check that the extension imports and its main entry points work."""

import math

import adrlite_py as m


def main():
    assert math.isclose(m.symbol_time(7), 1.024e-3, rel_tol=1e-12)
    assert m.time_on_air(12, mode="semtech") != m.time_on_air(12, mode="paper")
    assert m.path_loss_db(1000.0) == 128.95

    cfg = m.LoRaConfig(9, 8, 868.4, "4/6")
    print(cfg, cfg.time_on_air(), cfg.energy())

    space = m.ConfigSpace("config-1")
    assert len(space) == 30
    energies = space.energies()
    assert energies == sorted(energies)
    assert space.index_of(space.config_at(7)) == 7
    assert len(m.ConfigSpace("config-4")) == 360

    lite = m.AdrLite(30)
    trace = []
    for _ in range(6):
        trace.append(lite.update(lite.current))
    assert trace == [15, 8, 4, 2, 1, 1], trace

    try:
        m.LoRaConfig(7, 3)
    except ValueError as e:
        assert "{2, 5, 8, 11, 14}" in str(e)
    else:
        raise AssertionError("tp 3 accepted")

    res = m.run_simulation("adr-lite", num_eds=20, horizon_s=20_000.0, seed=3)
    assert 0.0 <= res["pdr"] <= 1.0
    assert res == m.run_simulation("adr-lite", num_eds=20, horizon_s=20_000.0, seed=3)
    print("run_simulation", res)

    rows = m.run_scenario("scenario3", desk_scale=True, jobs=2)
    assert len(rows) == 4 * 9
    print("run_scenario rows", len(rows), rows[0])
    print("smoke test ok")


if __name__ == "__main__":
    main()
