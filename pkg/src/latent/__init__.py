# Z/W sampling, truncation and mean-W estimation
