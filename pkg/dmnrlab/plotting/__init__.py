from .heights import plot_height_profile
