# Toy adversarial training: synthetic data, losses, style-mixing regularization, loop
