# Copyright 2025 Dragos Crintea - HikariLabs LTD
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#       http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Exception hierarchy for latentdoor.

Every error derives from the built-in a caller would already catch for that
kind of failure (``ValueError`` for bad shapes and configs,
``FloatingPointError`` for numeric blow-ups, ``FileNotFoundError`` for
missing artifacts), so library users can stay coarse while the CLI maps
each family to its own exit code.
"""


class ShapeMismatchError(ValueError):
    """An array does not have the shape an operation declared."""


class LabelOutOfRangeError(ValueError):
    """A class index is negative or not below the number of classes."""


class InvalidConfigError(ValueError):
    """A configuration value violates its documented range."""


class ConfigParseError(InvalidConfigError):
    """An experiment file could not be parsed into a configuration."""


class FormatError(ValueError):
    """A binary or YAML artifact has a bad marker, version or payload."""


class NonFiniteValueError(FloatingPointError):
    """A NaN or infinity appeared where only finite values are allowed."""


class NonFiniteGradientError(NonFiniteValueError):
    """An input or parameter gradient contains NaN or infinity."""


class DivergedLossError(NonFiniteValueError):
    """Training produced a non-finite loss."""


class NoLinearHeadError(ValueError):
    """The classifier head does not end in a linear layer."""


class EmptyEvaluationSetError(ValueError):
    """No samples remain after filtering for an evaluation."""


class DegenerateDirectionError(ValueError):
    """Clean and triggered feature means coincide, so no direction exists."""


class TooFewCleanSamplesError(ValueError):
    """Fewer than two samples are correctly classified."""


class ArchitectureMismatchError(ValueError):
    """Two networks that must share an architecture do not."""


class LineageMismatchError(ValueError):
    """Artifacts that must come from the same experiment lineage do not."""


class ImageTooSmallError(ValueError):
    """An image is smaller than the SSIM window."""


class MissingArtifactError(FileNotFoundError):
    """A file an operation depends on has not been produced yet."""
