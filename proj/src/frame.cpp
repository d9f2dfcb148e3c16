#include "salesrf/frame.hpp"

#include <algorithm>
#include <set>

#include <fmt/format.h>

#include "salesrf/error.hpp"

namespace salesrf {

void FeatureFrame::push_row(MonthIndex m, ShopId s, ItemId i, double target_value,
                            std::int64_t id) {
    month.push_back(m);
    shop.push_back(s);
    item.push_back(i);
    target.push_back(target_value);
    row_id.push_back(id);
    for (auto& column : features) column.push_back(0.0);
}

void FeatureFrame::add_feature(std::string name, std::vector<double> column) {
    if (find_feature(name) != nullptr)
        throw Error(ErrorKind::Data, fmt::format("duplicate feature column '{}'", name));
    if (column.size() != rows()) {
        throw Error(ErrorKind::Data, fmt::format("feature '{}' has {} values, frame has {} rows",
                                                 name, column.size(), rows()));
    }
    feature_names.push_back(std::move(name));
    features.push_back(std::move(column));
}

std::size_t FeatureFrame::feature_index(std::string_view name) const {
    for (std::size_t f = 0; f < feature_names.size(); ++f) {
        if (feature_names[f] == name) return f;
    }
    throw Error(ErrorKind::Schema, fmt::format("missing feature column '{}'", name));
}

const std::vector<double>* FeatureFrame::find_feature(std::string_view name) const {
    for (std::size_t f = 0; f < feature_names.size(); ++f) {
        if (feature_names[f] == name) return &features[f];
    }
    return nullptr;
}

FeatureFrame FeatureFrame::select(std::span<const std::size_t> row_indices) const {
    FeatureFrame out;
    out.feature_names = feature_names;
    out.features.resize(features.size());
    const auto n = row_indices.size();
    out.month.reserve(n);
    out.shop.reserve(n);
    out.item.reserve(n);
    out.row_id.reserve(n);
    out.target.reserve(n);
    for (const auto r : row_indices) {
        out.month.push_back(month[r]);
        out.shop.push_back(shop[r]);
        out.item.push_back(item[r]);
        out.row_id.push_back(row_id[r]);
        out.target.push_back(target[r]);
    }
    for (std::size_t f = 0; f < features.size(); ++f) {
        auto& column = out.features[f];
        column.reserve(n);
        for (const auto r : row_indices) column.push_back(features[f][r]);
    }
    return out;
}

void FeatureFrame::check() const {
    const auto n = rows();
    if (shop.size() != n || item.size() != n || row_id.size() != n || target.size() != n)
        throw Error(ErrorKind::Data, "frame key columns have inconsistent lengths");
    if (features.size() != feature_names.size())
        throw Error(ErrorKind::Data, "frame feature names and columns disagree");
    std::set<std::string_view> names;
    for (std::size_t f = 0; f < features.size(); ++f) {
        if (!names.insert(feature_names[f]).second)
            throw Error(ErrorKind::Data, fmt::format("duplicate feature column '{}'", feature_names[f]));
        if (features[f].size() != n)
            throw Error(ErrorKind::Data, fmt::format("feature '{}' has wrong length", feature_names[f]));
    }
}

bool FeatureFrame::operator==(const FeatureFrame& other) const {
    // NaN targets compare equal to each other here.
    auto same_target = [](double a, double b) {
        return (std::isnan(a) && std::isnan(b)) || a == b;
    };
    return month == other.month && shop == other.shop && item == other.item &&
           row_id == other.row_id && feature_names == other.feature_names &&
           features == other.features &&
           std::equal(target.begin(), target.end(), other.target.begin(), other.target.end(),
                      same_target);
}

}  // namespace salesrf
