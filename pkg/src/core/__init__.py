# Shared numeric plumbing: errors, RNG, tensor files, images
