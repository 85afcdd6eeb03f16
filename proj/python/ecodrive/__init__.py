"""Connected eco-driving for heavy trucks: advisory core and simulator."""

from ._core import (  # noqa: F401
    EARTH_RADIUS_M,
    ComparisonRefused,
    Error,
    InvalidInput,
    LoadError,
    MapGraph,
    NoMatchError,
    NoSignalError,
    __version__,
    advise,
    compare,
    controller_state,
    fuel_rate,
    haversine_distance,
    project_onto_segment,
    read_log,
    reference_speed,
    run_scenario,
    time_to_collision,
    tractive_power,
    trip_fuel,
)
