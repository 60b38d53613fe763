// Copyright 2026 The Energy Arena Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#pragma once

#include <array>
#include <string_view>

namespace gea {

struct SeedQuestion {
  std::string_view es;
  std::string_view en;
};

/// Sample questions in Spanish with English translations.
/// XXXX-style placeholders are meant to be replaced by the user.
inline constexpr std::array<SeedQuestion, 5> kSeedQuestions = {{
    {"Invéntate un eslogan para promocionar un XXXX (cambiar XXXX por un producto).",
     "Invent a slogan to promote a XXXX (replace XXXX with a product)."},
    {"Explicame qué es el parámetro Top-p en los LLM.",
     "Explain to me what the Top-p parameter is in an LLM."},
    {"Escribe un poema de 4 versos en el que juntando la primera letra de cada verso forma una "
     "palabra.",
     "Write a 4-line poem in which the first letter of each line forms a word."},
    {"Dime lo que sabes sobre el pueblo XXX (cambiar XXX por el nombre de un pueblo).",
     "Tell me what you know about the town XXX (replace XXX with the name of a town)."},
    {"Dame una receta que pueda preparar con estos ingredientes: XX, XX, XX... (cambiar XX por "
     "ingredientes).",
     "Give me a recipe I can make with these ingredients: XX, XX, XX... (replace XX with "
     "ingredients)."},
}};

}  // namespace gea
