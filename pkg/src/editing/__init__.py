# Style mixing, PCA latent directions, interpolation experiments
