# Optimization-based inversion, degraded (upsampling) inversion, inversion experiments
