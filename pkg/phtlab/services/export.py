import logging
import math
from typing import List, Optional, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from phtlab.core.errors import OutputError
from phtlab.core.file_io import FileService
from phtlab.schemas.schemas import (
    DecompositionReport, MonodromyVerdict, PHTSample, Polygon, Section,
)
from phtlab.services.monodromy import VINE_COLUMNS, MonodromyService
from phtlab.services.persistence import PersistenceService

logger = logging.getLogger(__name__)


class ExportService:

    @staticmethod
    def pht_records(sample: PHTSample) -> List[dict]:
        return [PersistenceService.diagram_record(e.diagram, e.angle) for e in sample.entries]

    @staticmethod
    def write_pht(path: str, sample: PHTSample) -> str:
        return FileService.write_json(path, ExportService.pht_records(sample))

    @staticmethod
    def write_decomposition(path: str, report: DecompositionReport) -> str:
        return FileService.write_json(path, report.model_dump(mode="json"))

    @staticmethod
    def write_verdict(path: str, verdict: MonodromyVerdict) -> str:
        return FileService.write_json(path, verdict.model_dump(mode="json"))

    @staticmethod
    def write_vines(path: str, sections: Sequence[Section], angles: Sequence[float]) -> str:
        return FileService.write_csv(path, VINE_COLUMNS, MonodromyService.export_vines(sections, angles))

    @staticmethod
    def write_svg(
        path: str,
        polygon: Polygon,
        sample: PHTSample,
        sections: Optional[Sequence[Section]] = None,
        sector_regions: Optional[Sequence[Sequence[tuple]]] = None,
    ) -> str:
        """
        Left panel: the shape and its sectors. Right panel: diagrams across
        the sampled angles, one line per section when sections are given.
        """
        FileService.check_writable(path)
        fig, (shape_ax, dgm_ax) = plt.subplots(1, 2, figsize=(10, 5))
        try:
            coords = polygon.coords()
            shape_ax.fill(coords[:, 0], coords[:, 1], color="#dddddd", zorder=0)
            shape_ax.plot(list(coords[:, 0]) + [coords[0, 0]], list(coords[:, 1]) + [coords[0, 1]], color="black", lw=1.2)
            for region in sector_regions or []:
                xs = [q[0] for q in region] + [region[0][0]]
                ys = [q[1] for q in region] + [region[0][1]]
                shape_ax.plot(xs, ys, color="tab:blue", lw=0.6, ls="--")
            shape_ax.set_aspect("equal")
            shape_ax.set_title("shape")

            finite = [q for e in sample.entries for q in e.diagram.finite()]
            births = [q.birth for e in sample.entries for q in e.diagram.points]
            top = max([q.death for q in finite] + births + [0.0]) + 0.1
            low = min(births + [0.0]) - 0.1
            dgm_ax.plot([low, top], [low, top], color="gray", lw=0.8)
            dgm_ax.axhline(top, color="gray", lw=0.5, ls=":")

            if sections:
                rows = MonodromyService.sample_sections(sections, sample.angles())
                cmap = plt.get_cmap("tab10")
                for section in sections:
                    own = [r for r in rows if r["section_id"] == section.section_id]
                    xs = [r["birth"] for r in own]
                    ys = [top if math.isinf(r["death"]) else r["death"] for r in own]
                    (line,) = dgm_ax.plot(xs, ys, ".-", ms=2, lw=0.8, color=cmap(section.section_id % 10))
                    line.set_gid(f"section-{section.section_id}")
            else:
                xs = [q.birth for e in sample.entries for q in e.diagram.points]
                ys = [top if q.essential else q.death for e in sample.entries for q in e.diagram.points]
                (line,) = dgm_ax.plot(xs, ys, ".", ms=2, color="black")
                line.set_gid("diagrams")
            dgm_ax.set_xlabel("birth")
            dgm_ax.set_ylabel("death")
            dgm_ax.set_title("diagrams over angles")
            fig.tight_layout()
            fig.savefig(path, format="svg")
        except OSError as e:
            raise OutputError(f"Could not write {path}: {e.strerror}")
        finally:
            plt.close(fig)
        logger.info("Wrote %s", path)
        return path
