# Analytic condensates package
