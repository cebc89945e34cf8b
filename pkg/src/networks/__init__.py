# Mapping network, style modulation, synthesis network, discriminator, checkpoints
