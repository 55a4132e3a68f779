#pragma once

#include <map>
#include <string>

namespace ragdef {

// The four prompt templates shipped with the engine, loaded from versioned
// text files. Placeholders are written as {name}.
struct PromptLibrary {
    std::string eire_extract;
    std::string semantic_score;
    std::string caf_verdict;
    std::string caf_answer;

    // Loads from `dir`; empty means the built-in prompt directory.
    static PromptLibrary load(const std::string& dir = "");
};

// Replaces every {key} occurrence with its value. Unknown placeholders are an
// error so template/file drift is caught loudly.
std::string render_template(const std::string& tmpl,
                            const std::map<std::string, std::string>& values);

}  // namespace ragdef
