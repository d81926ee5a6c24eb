"""confnodal - nodal problems for the conformable fractional diffusion pencil."""
