from .chain_spec import ChainSpec, Family, Sublattice, SpinSector, Orbital, Hopping, UnitCell
from .band_structure import BandStructure, CLSVector, GapResult
from .coupling_table import ComputeConfig, CouplingResult, CouplingTable
from .qmetric_result import QuantumMetricResult
from .asymptotic_prediction import Regime, AsymptoticPrediction, XiReference
from .fit_result import FitModel, FitResult, NcEstimate
from .scan_result import ScanResult
from .run_config import RunConfig
from .check_result import CheckResult
