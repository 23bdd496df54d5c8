from .spectrum_checks import SPECTRUM_CHECKS, STUB_SPECTRUM_CHECKS, DIAMOND_SPECTRUM_CHECKS
from .coupling_checks import COUPLING_CHECKS, DIAMOND_COUPLING_CHECKS
from .qmetric_checks import QMETRIC_CHECKS, STUB_QMETRIC_CHECKS, DIAMOND_QMETRIC_CHECKS
