from typing import Dict, List

from checks.coupling_checks import COUPLING_CHECKS, DIAMOND_COUPLING_CHECKS
from checks.qmetric_checks import DIAMOND_QMETRIC_CHECKS, QMETRIC_CHECKS, STUB_QMETRIC_CHECKS
from checks.spectrum_checks import DIAMOND_SPECTRUM_CHECKS, SPECTRUM_CHECKS, STUB_SPECTRUM_CHECKS
from core.errors import ValidationError
from models.chain_spec import Family


# Mapeo de checks a familias de cadena
FAMILY_CHECK_MAP: Dict[Family, List[dict]] = {
    Family.STUB: SPECTRUM_CHECKS + STUB_SPECTRUM_CHECKS + COUPLING_CHECKS + QMETRIC_CHECKS + STUB_QMETRIC_CHECKS,
    Family.DIAMOND: (
        SPECTRUM_CHECKS + DIAMOND_SPECTRUM_CHECKS + COUPLING_CHECKS + DIAMOND_COUPLING_CHECKS
        + QMETRIC_CHECKS + DIAMOND_QMETRIC_CHECKS
    ),
}


class CheckRegistry:
    """Mapa declarativo de qué checks aplican a cada familia."""

    def get_checks_for_family(self, family: Family) -> List[dict]:
        """Retorna la lista de checks aplicables a una familia."""
        return FAMILY_CHECK_MAP.get(Family.parse(family), SPECTRUM_CHECKS)

    def get_all_check_ids(self) -> List[str]:
        """Retorna todos los check_ids registrados (sin duplicados)."""
        seen = set()
        ids = []
        for checks in FAMILY_CHECK_MAP.values():
            for check in checks:
                cid = check["check_id"]
                if cid not in seen:
                    seen.add(cid)
                    ids.append(cid)
        return ids

    def validate_ids(self, check_ids) -> None:
        """Lanza ValidationError si algún id (p.ej. de disabled_checks) no está registrado."""
        unknown = sorted(set(check_ids) - set(self.get_all_check_ids()))
        if unknown:
            raise ValidationError(f"Checks desconocidos: {unknown}")
