// Copyright The romforge Authors
// SPDX-License-Identifier: Apache-2.0

#include "romforge/io/checkpoint.hpp"

#include <map>

#include "romforge/common/error.hpp"
#include "romforge/io/binary.hpp"

namespace romforge::io
{

using Json = nlohmann::json;

namespace
{

constexpr char kMagic[] = "ROMFORGE";

std::size_t dtype_size(DType t)
{
  switch (t)
  {
  case DType::F32:
    return 4;
  case DType::F64:
    return 8;
  case DType::U8:
    return 1;
  }
  return 0;
}

template <typename... Fs>
struct Overloaded : Fs...
{
  using Fs::operator()...;
};

}  // namespace

std::vector<std::uint8_t> encode_container(const Container &c)
{
  ByteWriter w;
  w.text(kMagic);
  w.u32(kCheckpointVersion);
  w.u32(static_cast<std::uint32_t>(c.arrays.size()));
  for (const auto &a : c.arrays)
  {
    w.u32(static_cast<std::uint32_t>(a.name.size()));
    w.text(a.name);
    w.u8(static_cast<std::uint8_t>(a.dtype));
    w.u32(static_cast<std::uint32_t>(a.dims.size()));
    std::uint64_t count = 1;
    for (auto d : a.dims)
    {
      w.u64(d);
      count *= d;
    }
    if (a.data.size() != count * dtype_size(a.dtype))
    {
      throw FormatError("array '" + a.name + "' payload does not match its dimensions");
    }
    w.values(std::span<const std::uint8_t>(a.data));
  }
  const auto trailer = c.trailer.dump();
  w.u64(trailer.size());
  w.text(trailer);
  return w.bytes();
}

Container decode_container(std::span<const std::uint8_t> bytes, const std::string &context)
{
  ByteReader r(bytes, context);
  if (r.text(8) != kMagic)
  {
    throw FormatError(context + ": bad magic, not a checkpoint");
  }
  if (const auto v = r.u32(); v != kCheckpointVersion)
  {
    throw FormatError(context + ": unsupported checkpoint version " + std::to_string(v));
  }
  Container c;
  const auto count = r.u32();
  for (std::uint32_t i = 0; i < count; ++i)
  {
    StoredArray a;
    a.name = r.text(r.u32());
    const auto tag = r.u8();
    if (tag < 1 || tag > 3)
    {
      throw FormatError(context + ": unknown dtype tag " + std::to_string(tag));
    }
    a.dtype = static_cast<DType>(tag);
    const auto rank = r.u32();
    std::uint64_t n = 1;
    for (std::uint32_t k = 0; k < rank; ++k)
    {
      a.dims.push_back(r.u64());
      n *= a.dims.back();
    }
    if (n * dtype_size(a.dtype) > r.remaining())
    {
      throw FormatError(context + ": truncated array '" + a.name + "'");
    }
    a.data = r.values<std::uint8_t>(n * dtype_size(a.dtype));
    c.arrays.push_back(std::move(a));
  }
  const auto len = r.u64();
  if (len > r.remaining())
  {
    throw FormatError(context + ": truncated trailer");
  }
  try
  {
    c.trailer = Json::parse(r.text(len));
  }
  catch (const nlohmann::json::parse_error &e)
  {
    throw FormatError(context + ": bad trailer: " + e.what());
  }
  if (r.remaining() != 0)
  {
    throw FormatError(context + ": trailing bytes after trailer");
  }
  return c;
}

Json layer_spec_to_json(const nn::LayerSpec &spec)
{
  Json j = std::visit(
      Overloaded{[](const nn::Conv2dSpec &s) -> Json {
                   return {{"in_channels", s.in_channels}, {"out_channels", s.out_channels},
                           {"kernel", s.kernel},           {"stride", s.stride},
                           {"padding", s.padding}};
                 },
                 [](const nn::LinearSpec &s) -> Json {
                   return {{"in_features", s.in_features}, {"out_features", s.out_features}};
                 },
                 [](const nn::BatchNormSpec &s) -> Json {
                   return {{"channels", s.channels}, {"eps", s.eps}, {"momentum", s.momentum}};
                 },
                 [](const nn::LeakyReluSpec &s) -> Json { return {{"slope", s.slope}}; },
                 [](const nn::DropoutSpec &s) -> Json { return {{"rate", s.rate}}; },
                 [](const nn::ReshapeSpec &s) -> Json { return {{"shape", s.shape}}; },
                 [](const auto &) -> Json { return Json::object(); }},
      spec);
  j["type"] = nn::layer_name(spec);
  return j;
}

nn::LayerSpec layer_spec_from_json(const Json &j)
{
  const auto type = j.at("type").get<std::string>();
  if (type == "Conv2d")
  {
    return nn::Conv2dSpec{j.at("in_channels").get<int>(), j.at("out_channels").get<int>(), j.at("kernel").get<int>(),
                          j.at("stride").get<int>(), j.at("padding").get<int>()};
  }
  if (type == "Linear")
  {
    return nn::LinearSpec{j.at("in_features").get<int>(), j.at("out_features").get<int>()};
  }
  if (type == "BatchNorm")
  {
    return nn::BatchNormSpec{j.at("channels").get<int>(), j.at("eps").get<double>(), j.at("momentum").get<double>()};
  }
  if (type == "LeakyReLU")
  {
    return nn::LeakyReluSpec{j.at("slope").get<double>()};
  }
  if (type == "Dropout")
  {
    return nn::DropoutSpec{j.at("rate").get<double>()};
  }
  if (type == "Upsample2x")
  {
    return nn::Upsample2xSpec{};
  }
  if (type == "Sigmoid")
  {
    return nn::SigmoidSpec{};
  }
  if (type == "Flatten")
  {
    return nn::FlattenSpec{};
  }
  if (type == "Reshape")
  {
    return nn::ReshapeSpec{j.at("shape").get<std::vector<std::size_t>>()};
  }
  throw FormatError("unknown layer type '" + type + "'");
}

void save_network(const std::filesystem::path &path, nn::Sequential<float> &net, const Json &metadata)
{
  Container c;
  for (const auto &named : net.state())
  {
    StoredArray a;
    a.name = named.name;
    a.dtype = DType::F32;
    for (auto d : named.value->shape())
    {
      a.dims.push_back(d);
    }
    const auto *p = reinterpret_cast<const std::uint8_t *>(named.value->data());
    a.data.assign(p, p + named.value->size() * sizeof(float));
    c.arrays.push_back(std::move(a));
  }
  Json layers = Json::array();
  for (const auto &s : net.specs())
  {
    layers.push_back(layer_spec_to_json(s));
  }
  c.trailer = {{"layers", layers}, {"metadata", metadata}};
  write_file(path, encode_container(c));
}

nn::Sequential<float> load_network(const std::filesystem::path &path, Json *metadata)
{
  const auto bytes = read_file(path);
  auto c = decode_container(bytes, path.string());
  std::vector<nn::LayerSpec> specs;
  try
  {
    for (const auto &l : c.trailer.at("layers"))
    {
      specs.push_back(layer_spec_from_json(l));
    }
  }
  catch (const nlohmann::json::exception &e)
  {
    throw FormatError(path.string() + ": bad layer list: " + e.what());
  }
  nn::Sequential<float> net(specs, 0);
  std::map<std::string, const StoredArray *> by_name;
  for (const auto &a : c.arrays)
  {
    by_name[a.name] = &a;
  }
  auto state = net.state();
  if (state.size() != c.arrays.size())
  {
    throw FormatError(path.string() + ": array count does not match the layer list");
  }
  for (auto &named : state)
  {
    const auto it = by_name.find(named.name);
    if (it == by_name.end())
    {
      throw FormatError(path.string() + ": missing array '" + named.name + "'");
    }
    const auto &a = *it->second;
    nn::Shape shape(a.dims.begin(), a.dims.end());
    if (a.dtype != DType::F32 || shape != named.value->shape())
    {
      throw FormatError(path.string() + ": array '" + a.name + "' has the wrong type or shape");
    }
    std::memcpy(named.value->data(), a.data.data(), a.data.size());
  }
  if (metadata)
  {
    *metadata = c.trailer.value("metadata", Json::object());
  }
  return net;
}

}  // namespace romforge::io
