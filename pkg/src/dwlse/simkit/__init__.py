"""Tracking-scenario simulation and Monte Carlo evaluation."""

from .campaign import CampaignResult, SweepRow, run_campaign, sweep_iterations
from .config import ScenarioConfig, load_scenario, tracking20
from .metrics import MetricSeries, consensus_error, error_norms
from .simulate import generate_measurements, generate_truth
