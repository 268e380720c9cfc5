"""Permission mediation broker, workload simulator and overhead model."""

from .core import (
    AccessHandle,
    AppManifest,
    Criticality,
    PermissionRequirement,
    PermissionStatus,
    RealAccess,
    Refused,
    ResourceClass,
    Rule,
    RuleOrigin,
    SessionScript,
    VirtualAccess,
    validate_manifest,
)
from .broker import (
    Broker,
    DecisionProvider,
    InstallReport,
    Metering,
    PromptContext,
    ReplayProvider,
    ScriptedProvider,
    SimClock,
    UnitCosts,
    UserDecision,
)
from .rule_store import RuleStore
from .virtual_profiles import (
    ProfileRegistry,
    RealFixture,
    RealProvider,
    build_profiles,
    default_fixture,
    invoke,
    open_session,
    real_provider_invoke,
)
from .workload import (
    DayMetrics,
    DayPlan,
    SessionOutcome,
    generate_default_plan,
    measure_components,
    run_day,
    run_session,
)
from .cost_model import (
    CostParams,
    CostBreakdown,
    asymptotic_check,
    calibrate,
    cost_new_app,
    cost_old_app,
    pmmg_daily_closed,
    pmmg_daily_composed,
    vp_time,
)

__version__ = "0.1.0"
