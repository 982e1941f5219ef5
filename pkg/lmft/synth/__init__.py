from .generators import (
    ClassSpec,
    GeneratorKind,
    GeneratorSpec,
    gen_labeled_segments,
    gen_variable_noise,
    gen_variable_period,
    generate,
    variable_noise_core,
    variable_noise_variance,
    variable_period_core,
)
