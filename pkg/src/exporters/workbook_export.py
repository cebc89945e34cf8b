"""
Metrics workbook exporter.

Writes experiment tables (pandas DataFrames from the report models) to a
formatted Excel workbook, one sheet per table, and the same tables as CSV
files next to it. Think of the workbook as the human-readable summary of a
run and the CSVs as the machine-readable one.
"""

from datetime import datetime
from pathlib import Path
from typing import Dict, List

import numpy as np
import pandas as pd
from openpyxl import Workbook
from openpyxl.styles import Alignment, Border, Font, PatternFill, Side
from openpyxl.utils import get_column_letter

MAX_SHEET_NAME = 31


class MetricsWorkbookExporter:
    """
    Exports named DataFrames to a styled .xlsx file.

    Each sheet has a title row, a styled header row and the table below it.
    Float columns use a 4-decimal number format.
    """

    def __init__(self):
        self.title_font = Font(size=14, bold=True)
        self.header_font = Font(name='Arial', size=12, bold=True, color='FFFFFF')
        self.header_fill = PatternFill(start_color='366092', end_color='366092', fill_type='solid')
        self.section_fill = PatternFill(start_color='D9E1F2', end_color='D9E1F2', fill_type='solid')
        self.border = Border(
            left=Side(style='thin'),
            right=Side(style='thin'),
            top=Side(style='thin'),
            bottom=Side(style='thin')
        )

    def export(self, tables: Dict[str, pd.DataFrame], output_path: Path, title: str = "Experiment report") -> Path:
        """
        Write every table to its own sheet.

        Args:
            tables: sheet name -> DataFrame (names are cut to Excel's 31 characters)
            output_path: where to save the workbook
            title: shown in the first row of every sheet

        Returns:
            Path to the created file
        """
        if not tables:
            raise ValueError("nothing to export: no tables given")

        wb = Workbook()
        if 'Sheet' in wb.sheetnames:
            wb.remove(wb['Sheet'])

        for name, frame in tables.items():
            self._write_sheet(wb, name[:MAX_SHEET_NAME], frame, title)

        output_path = Path(output_path)
        output_path.parent.mkdir(parents=True, exist_ok=True)
        wb.save(output_path)
        return output_path

    def _write_sheet(self, wb: Workbook, name: str, frame: pd.DataFrame, title: str):
        ws = wb.create_sheet(name)
        ws['A1'] = f"{title} - {name}"
        ws['A1'].font = self.title_font
        ws['A2'] = f"Generated: {datetime.now().strftime('%Y-%m-%d %H:%M')}"

        for col, header in enumerate(frame.columns, start=1):
            cell = ws.cell(row=4, column=col, value=str(header))
            cell.font = self.header_font
            cell.fill = self.header_fill
            cell.alignment = Alignment(horizontal='center', vertical='center')
            cell.border = self.border

        float_cols = {idx for idx, dtype in enumerate(frame.dtypes, start=1) if np.issubdtype(dtype, np.floating)}
        for r, row in enumerate(frame.itertuples(index=False), start=5):
            for col, value in enumerate(row, start=1):
                cell = ws.cell(row=r, column=col, value=_cell_value(value))
                cell.border = self.border
                if col in float_cols:
                    cell.number_format = '0.0000'
                if col == 1:
                    cell.fill = self.section_fill

        for col, header in enumerate(frame.columns, start=1):
            ws.column_dimensions[get_column_letter(col)].width = max(12, len(str(header)) + 4)


def _cell_value(value):
    """openpyxl takes plain Python scalars; NaN and None become empty cells."""
    if value is None:
        return None
    if isinstance(value, (np.floating, float)):
        return None if np.isnan(value) else float(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.bool_):
        return bool(value)
    return value


def write_tables(tables: Dict[str, pd.DataFrame], out_dir: Path) -> List[Path]:
    """One `<name>.csv` per table in `out_dir`."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    for name, frame in tables.items():
        path = out_dir / f"{name}.csv"
        frame.to_csv(path, index=False)
        paths.append(path)
    return paths
