#pragma once

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

inline std::string corpus_path(const std::string& name) { return std::string(NONTERM_CORPUS_DIR) + "/" + name; }

inline std::string read_corpus(const std::string& name) {
    std::ifstream in(corpus_path(name));
    if (!in) throw std::runtime_error("cannot open " + corpus_path(name));
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}
