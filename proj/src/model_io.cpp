#include "salesrf/model_io.hpp"

#include <charconv>
#include <cmath>
#include <sstream>
#include <vector>

#include <fmt/format.h>

#include "salesrf/csv.hpp"
#include "salesrf/error.hpp"

namespace salesrf {

namespace {

// Line-oriented tokenizer that reports the line number of anything malformed.
class ModelReader {
public:
    ModelReader(std::string_view text, std::string_view source) : source_(source) {
        std::size_t pos = 0;
        while (pos < text.size()) {
            auto end = text.find('\n', pos);
            if (end == std::string_view::npos) end = text.size();
            lines_.emplace_back(text.substr(pos, end - pos));
            pos = end + 1;
        }
    }

    std::vector<std::string_view> next_line(std::string_view expected_tag = {}) {
        if (cursor_ >= lines_.size())
            fail(fmt::format("file is truncated; expected '{}'", expected_tag.empty() ? "node" : expected_tag));
        line_ = lines_[cursor_++];
        std::vector<std::string_view> tokens;
        std::size_t pos = 0;
        while (pos < line_.size()) {
            const auto end = std::min(line_.find(' ', pos), line_.size());
            if (end > pos) tokens.push_back(line_.substr(pos, end - pos));
            pos = end + 1;
        }
        if (tokens.empty()) fail("unexpected blank line");
        if (!expected_tag.empty() && tokens[0] != expected_tag)
            fail(fmt::format("expected '{}'", expected_tag));
        return tokens;
    }

    /// Remainder of the current line after `count` leading tokens.
    std::string_view rest_after(std::size_t count) const {
        std::size_t pos = 0;
        for (std::size_t i = 0; i < count; ++i) {
            pos = line_.find(' ', pos);
            if (pos == std::string_view::npos) return {};
            ++pos;
        }
        return line_.substr(pos);
    }

    template <typename T>
    T number(const std::vector<std::string_view>& tokens, std::size_t index) const {
        if (index >= tokens.size()) fail("missing field");
        T value{};
        const auto token = tokens[index];
        const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
        if (ec != std::errc() || ptr != token.data() + token.size())
            fail(fmt::format("bad number '{}'", token));
        return value;
    }

    [[noreturn]] void fail(const std::string& what) const {
        throw Error(ErrorKind::Model, fmt::format("{}:{}: {}", source_, cursor_, what));
    }

private:
    std::string source_;
    std::vector<std::string_view> lines_;
    std::size_t cursor_ = 0;
    std::string_view line_;
};

}  // namespace

std::string serialize_model(const ForestModel& model) {
    const auto& p = model.params;
    std::string out = fmt::format("salesrf-forest {}\n", kModelFormatVersion);
    out += fmt::format("params {} {} {} {} {} {}\n", p.n_trees, p.max_depth, p.min_samples_split,
                       p.min_samples_leaf, csv::format_double(p.max_features), p.bootstrap ? 1 : 0);
    out += fmt::format("master_seed {}\n", p.master_seed);
    out += fmt::format("features {}\n", model.feature_names.size());
    for (std::size_t f = 0; f < model.feature_names.size(); ++f) {
        out += fmt::format("feature {} {}\n", csv::format_double(model.impurity_sums[f]),
                           model.feature_names[f]);
    }
    out += fmt::format("trees {}\n", model.trees.size());
    for (std::size_t t = 0; t < model.trees.size(); ++t) {
        const auto& tree = model.trees[t];
        out += fmt::format("tree {} {} {}\n", t, tree.nodes.size(), tree.depth);
        for (const auto& node : tree.nodes) {
            if (node.is_leaf()) {
                out += fmt::format("leaf {}\n", csv::format_double(node.value));
            } else {
                out += fmt::format("split {} {} {} {}\n", node.feature,
                                   csv::format_double(node.threshold), node.left, node.right);
            }
        }
    }
    out += "end\n";
    return out;
}

ForestModel deserialize_model(std::string_view text, std::string_view source) {
    ModelReader in(text, source);
    {
        const auto header = in.next_line("salesrf-forest");
        const int version = in.number<int>(header, 1);
        if (version != kModelFormatVersion) {
            throw Error(ErrorKind::Version,
                        fmt::format("{}: model format version {} is not supported (this build reads version {})",
                                    source, version, kModelFormatVersion));
        }
    }
    ForestModel model;
    {
        const auto t = in.next_line("params");
        auto& p = model.params;
        p.n_trees = in.number<int>(t, 1);
        p.max_depth = in.number<int>(t, 2);
        p.min_samples_split = in.number<int>(t, 3);
        p.min_samples_leaf = in.number<int>(t, 4);
        p.max_features = in.number<double>(t, 5);
        p.bootstrap = in.number<int>(t, 6) != 0;
        p.master_seed = in.number<std::uint64_t>(in.next_line("master_seed"), 1);
    }
    const auto n_features = in.number<std::size_t>(in.next_line("features"), 1);
    for (std::size_t f = 0; f < n_features; ++f) {
        const auto t = in.next_line("feature");
        model.impurity_sums.push_back(in.number<double>(t, 1));
        const auto name = in.rest_after(2);
        if (name.empty()) in.fail("feature name missing");
        model.feature_names.emplace_back(name);
    }
    const auto n_trees = in.number<std::size_t>(in.next_line("trees"), 1);
    if (n_trees != static_cast<std::size_t>(model.params.n_trees))
        in.fail(fmt::format("tree count {} disagrees with n_trees {}", n_trees, model.params.n_trees));
    for (std::size_t t = 0; t < n_trees; ++t) {
        const auto header = in.next_line("tree");
        if (in.number<std::size_t>(header, 1) != t) in.fail("trees out of order");
        const auto n_nodes = in.number<std::size_t>(header, 2);
        RegressionTree tree;
        tree.depth = in.number<int>(header, 3);
        for (std::size_t i = 0; i < n_nodes; ++i) {
            const auto tokens = in.next_line();
            TreeNode node;
            if (tokens[0] == "leaf") {
                node.value = in.number<double>(tokens, 1);
                if (!std::isfinite(node.value)) in.fail("leaf value is not finite");
            } else if (tokens[0] == "split") {
                node.feature = in.number<std::int32_t>(tokens, 1);
                node.threshold = in.number<double>(tokens, 2);
                node.left = in.number<std::int32_t>(tokens, 3);
                node.right = in.number<std::int32_t>(tokens, 4);
                const auto self = static_cast<std::int32_t>(i);
                if (node.feature < 0 || static_cast<std::size_t>(node.feature) >= n_features)
                    in.fail(fmt::format("split feature {} out of range", node.feature));
                if (node.left <= self || node.right <= self ||
                    static_cast<std::size_t>(node.left) >= n_nodes ||
                    static_cast<std::size_t>(node.right) >= n_nodes)
                    in.fail("split child index out of range");
            } else {
                in.fail("expected 'leaf' or 'split'");
            }
            tree.nodes.push_back(node);
        }
        model.trees.push_back(std::move(tree));
    }
    in.next_line("end");
    return model;
}

void save_model(const ForestModel& model, const std::filesystem::path& path) {
    csv::write_text_file(path, serialize_model(model));
}

ForestModel load_model(const std::filesystem::path& path) {
    return deserialize_model(csv::read_text_file(path), path.string());
}

}  // namespace salesrf
