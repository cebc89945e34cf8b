# Export modules for experiment reports (workbook + CSV)
