#include "mofh6/prompts.hpp"

namespace mofh6::prompts {

namespace {

json nullable_string() { return {{"type", json::array({"string", "null"})}}; }

llm::PromptTemplate synthesis_template() {
  llm::PromptTemplate t;
  t.name = kSynthesis;
  t.role_instruction =
      "You are a synthetic chemist reading the full text of a paper on metal-organic frameworks. "
      "Find every paragraph that describes how a framework compound was made. Return each one "
      "as a complete, self-contained description: when the text refers back to earlier conditions "
      "(\"under the above conditions\", \"similarly\", \"the same procedure\"), write those conditions "
      "out in full with the stated changes applied. Label organic ligand preparations with kind "
      "\"ligand\". Leave out characterization data such as elemental analysis, IR and NMR. "
      "compound_hint is the label the paper uses for the compound (bold number, code or name).";
  t.output_schema = synthesis_schema();
  t.shots.push_back(
      {"Synthesis of [Cu2(L)(H2O)2] (1). CuCl2·2H2O (0.1 mmol) and H4L (0.05 mmol) in DMF (4 mL) were "
       "heated at 85 °C for 48 h. Blue crystals were collected. Anal. Calcd for C16H10Cu2O10: C, 39.0; H, 2.0. "
       "Compound 2 was obtained under the above conditions except that the temperature was 100 °C.",
       {{"paragraphs",
         json::array(
             {{{"compound_hint", "1"},
               {"text", "CuCl2·2H2O (0.1 mmol) and H4L (0.05 mmol) in DMF (4 mL) were heated at 85 °C for 48 h. "
                        "Blue crystals were collected."},
               {"kind", "mof"}},
              {{"compound_hint", "2"},
               {"text", "CuCl2·2H2O (0.1 mmol) and H4L (0.05 mmol) in DMF (4 mL) were heated at 100 °C for 48 h."},
               {"kind", "mof"}}})}}});
  return t;
}

llm::PromptTemplate tables_template() {
  llm::PromptTemplate t;
  t.name = kTables;
  t.role_instruction =
      "You extract crystallographic data from papers. Read both formatted tables and sentences "
      "that state cell parameters. For every compound return one object whose keys are the column "
      "headers exactly as printed (for example \"Empirical formula\", \"a (Å)\", \"Space group\") "
      "and whose values are copied verbatim, including uncertainties. Use null for empty cells.";
  t.output_schema = tables_schema();
  t.shots.push_back(
      {"Table 1. Crystal data. Compound: 1. Empirical formula: C8H4O5Zn. Crystal system: Monoclinic. "
       "Space group: P21/c. a (Å): 10.123(4). b (Å): 12.50(1). c (Å): 8.001(2). α (°): 90. β (°): 101.2(1). γ (°): 90.",
       {{"entries", json::array({{{"Compound", "1"},
                                  {"Empirical formula", "C8H4O5Zn"},
                                  {"Crystal system", "Monoclinic"},
                                  {"Space group", "P21/c"},
                                  {"a (Å)", "10.123(4)"},
                                  {"b (Å)", "12.50(1)"},
                                  {"c (Å)", "8.001(2)"},
                                  {"α (°)", "90"},
                                  {"β (°)", "101.2(1)"},
                                  {"γ (°)", "90"}}})}}});
  return t;
}

llm::PromptTemplate crystal_adjudicate_template() {
  llm::PromptTemplate t;
  t.name = kCrystalAdjudicate;
  t.role_instruction =
      "You compare two sets of crystallographic parameters that agree only approximately. "
      "Decide whether they plausibly describe the same compound. Differences in cell setting "
      "or small refinement differences are acceptable; different metals are not.";
  t.output_schema = {{"type", "object"},
                     {"required", {"same_compound"}},
                     {"properties", {{"same_compound", {{"type", "boolean"}}}, {"reason", {{"type", "string"}}}}}};
  return t;
}

llm::PromptTemplate abbrev_adjudicate_template() {
  llm::PromptTemplate t;
  t.name = kAbbrevAdjudicate;
  t.role_instruction =
      "A ligand abbreviation is defined more than once in a paper. Given the abbreviation, the "
      "candidate full names and the sentences that define them, pick the name the main text uses "
      "for the framework ligand. Answer null when none of the candidates fits.";
  t.output_schema = {{"type", "object"},
                     {"required", {"abbreviation", "full_name"}},
                     {"properties", {{"abbreviation", {{"type", "string"}}}, {"full_name", nullable_string()}}}};
  t.shots.push_back(
      {R"({"abbreviation":"H2L","candidates":["terephthalic acid","2-aminoterephthalic acid"],)"
       R"("evidence":["Terephthalic acid (H2L) was purchased.","In the SI, 2-aminoterephthalic acid (H2L) denotes the ligand of the control sample."]})",
       {{"abbreviation", "H2L"}, {"full_name", "terephthalic acid"}}});
  return t;
}

llm::PromptTemplate structured_template() {
  llm::PromptTemplate t;
  t.name = kStructured;
  t.role_instruction =
      "Convert one MOF synthesis description into the 3C format (chemicals, conditions, "
      "crystallization). Copy names and quantities verbatim with their original units. For several "
      "solvents list each volume joined by \" + \" and do not add them up. Use null for anything the "
      "text does not state.";
  t.output_schema = structured_schema();
  t.shots.push_back({"Cu(NO3)2·3H2O (0.20 mmol, 48 mg) and H3BTC (0.10 mmol) in ethanol (3 mL) and water (3 mL) "
                     "were kept at 80 °C for 24 h in a glass vial. Blue octahedral crystals, yield 60%.",
                     {{"metal_source", "Cu(NO3)2·3H2O"},
                      {"organic_linkers_source", "H3BTC"},
                      {"modulator_source", nullptr},
                      {"solvent_source", "ethanol, water"},
                      {"quantity_of_metal", "0.20 mmol, 48 mg"},
                      {"quantity_of_organic_linkers", "0.10 mmol"},
                      {"quantity_of_modulator", nullptr},
                      {"quantity_of_solvent", "3 mL + 3 mL"},
                      {"synthesis_temperature", "80 °C"},
                      {"synthesis_time", "24 h"},
                      {"crystal_morphology", "blue octahedral crystals"},
                      {"yield", "60%"},
                      {"equipment", "glass vial"}}});
  return t;
}

llm::PromptTemplate query_parse_template() {
  llm::PromptTemplate t;
  t.name = kQueryParse;
  t.role_instruction =
      "You turn questions about a MOF crystal database into a structured query. query_type is one "
      "of property, range, comparison, statistical, paging, reset, greeting, chat. Put CCDC codes "
      "or MOF names in materials. Use the property names \"PLD (Å)\", \"LCD (Å)\", \"Density (g/cm3)\", "
      "\"Accessible_Surface_Area (m2/cm3)\", \"GSA (m2/g)\", \"Void_Fraction\". Range bounds use the short "
      "keys PLD, LCD, Density, VSA, GSA, Void_Fraction. Set uses_context when the question refers to "
      "an earlier answer.";
  t.output_schema = parsed_query_schema();
  t.shots.push_back({"What is the LCD of ZIF-8?",
                     {{"query_type", "property"},
                      {"uses_context", false},
                      {"materials", {"ZIF-8"}},
                      {"properties", {"LCD (Å)"}},
                      {"range", {{"min", json::object()}, {"max", json::object()}}},
                      {"operation", {{"type", "none"}, {"value", nullptr}}},
                      {"reasoning", {"asks for one property of one named material"}},
                      {"page_size", nullptr},
                      {"paged_index", nullptr}}});
  return t;
}

llm::PromptTemplate query_answer_template() {
  llm::PromptTemplate t;
  t.name = kQueryAnswer;
  t.role_instruction =
      "Answer the user's question from the JSON result summary only. Quote every number exactly "
      "as it appears in the summary and do not compute new ones. Reply in the language of the question.";
  t.output_schema = {{"type", "object"}, {"required", {"answer"}}, {"properties", {{"answer", {{"type", "string"}}}}}};
  return t;
}

}  // namespace

json synthesis_schema() {
  return {{"type", "object"},
          {"required", {"paragraphs"}},
          {"properties",
           {{"paragraphs",
             {{"type", "array"},
              {"items",
               {{"type", "object"},
                {"required", {"compound_hint", "text"}},
                {"properties",
                 {{"compound_hint", {{"type", "string"}}},
                  {"text", {{"type", "string"}, {"minLength", 1}}},
                  {"kind", {{"enum", {"mof", "ligand", "other"}}}}}}}}}}}}};
}

json tables_schema() {
  return {{"type", "object"},
          {"required", {"entries"}},
          {"properties", {{"entries", {{"type", "array"}, {"items", {{"type", "object"}}}}}}}};
}

json structured_schema() {
  json props = json::object();
  for (const char* key : {"metal_source", "organic_linkers_source", "modulator_source", "solvent_source",
                          "quantity_of_metal", "quantity_of_organic_linkers", "quantity_of_modulator",
                          "quantity_of_solvent", "synthesis_temperature", "synthesis_time", "crystal_morphology",
                          "yield", "equipment"})
    props[key] = nullable_string();
  return {{"type", "object"}, {"properties", props}, {"additionalProperties", false}};
}

json parsed_query_schema() {
  json number_map = {{"type", "object"}, {"additionalProperties", {{"type", "number"}}}};
  return {{"type", "object"},
          {"required", {"query_type", "uses_context", "materials", "properties"}},
          {"properties",
           {{"query_type",
             {{"enum", {"property", "range", "comparison", "statistical", "paging", "reset", "greeting", "chat"}}}},
            {"uses_context", {{"type", "boolean"}}},
            {"materials", {{"type", "array"}, {"items", {{"type", "string"}}}}},
            {"properties", {{"type", "array"}, {"items", {{"type", "string"}}}}},
            {"range", {{"type", "object"}, {"properties", {{"min", number_map}, {"max", number_map}}}}},
            {"operation",
             {{"type", "object"},
              {"properties",
               {{"type", {{"enum", {"mean", "max", "min", "count", "none"}}}},
                {"value", {{"type", json::array({"number", "null"})}}}}}}},
            {"reasoning", {{"type", "array"}, {"items", {{"type", "string"}}}}},
            {"page_size", {{"type", json::array({"integer", "null"})}, {"exclusiveMinimum", 0}}},
            {"paged_index", {{"type", json::array({"integer", "null"})}, {"minimum", 0}}}}}};
}

void register_builtin(llm::TemplateRegistry& registry) {
  registry.add(synthesis_template());
  registry.add(tables_template());
  registry.add(crystal_adjudicate_template());
  registry.add(abbrev_adjudicate_template());
  registry.add(structured_template());
  registry.add(query_parse_template());
  registry.add(query_answer_template());
}

std::shared_ptr<const llm::TemplateRegistry> builtin_registry() {
  auto r = std::make_shared<llm::TemplateRegistry>();
  register_builtin(*r);
  return r;
}

}  // namespace mofh6::prompts
