# Fixed-feature perceptual distance, Frechet feature distance, segment PPL
