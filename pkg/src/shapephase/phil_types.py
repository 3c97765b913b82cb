"""
PHIL parameter types for scenario files.

``real`` and ``reals`` behave like the standard ``float`` and ``floats`` types
but format values with full precision, so that a scenario written back to
PHIL reproduces the same floating point numbers. ``vec3s`` holds a list of
3-vectors, written either flat or grouped::

  positions = (1, 0, 0) (-0.5, 0.866, 0) (-0.5, -0.866, 0)
"""

import freephil
from freephil import converters, tokenizer


def format_real(value):
    return repr(float(value))


class real_converters(converters.float_converters):

    phil_type = "real"

    def _value_as_str(self, value):
        return format_real(value)


class reals_converters(converters.floats_converters):

    phil_type = "reals"

    def _value_as_str(self, value):
        return format_real(value)


class vec3s_converters:
    """
    Converter for lists of 3-vectors

    :param size: Required number of vectors
    """

    phil_type = "vec3s"

    def __init__(self, size=None):
        assert size is None or size > 0
        self.size = size

    def __str__(self):
        if self.size is None:
            return self.phil_type
        return "%s(size=%d)" % (self.phil_type, self.size)

    def from_words(self, words, master):
        path = master.full_path()
        text = converters.str_from_words(words)
        if text is None or text is freephil.Auto:
            return text
        for c in "()[],;":
            text = text.replace(c, " ")
        numbers = [
            converters.float_from_number(
                converters.number_from_value_string(value_string=s, words=words, path=path),
                words=words,
                path=path,
            )
            for s in text.split()
        ]
        if len(numbers) % 3:
            raise RuntimeError(
                "%s needs groups of three numbers, %d given%s"
                % (path, len(numbers), words[0].where_str())
            )
        vectors = [numbers[k : k + 3] for k in range(0, len(numbers), 3)]
        if self.size is not None and len(vectors) != self.size:
            raise RuntimeError(
                "%s needs exactly %d vectors, %d given%s"
                % (path, self.size, len(vectors), words[0].where_str())
            )
        return vectors

    def as_words(self, python_object, master):
        if python_object is None:
            return [tokenizer.word(value="None")]
        result = []
        for vector in python_object:
            x, y, z = (format_real(value) for value in vector)
            result.extend(
                [
                    tokenizer.word(value="(" + x + ","),
                    tokenizer.word(value=y + ","),
                    tokenizer.word(value=z + ")"),
                ]
            )
        return result


converter_registry = freephil.extended_converter_registry(
    additional_converters=[real_converters, reals_converters, vec3s_converters]
)
