var a = 1, b = 2, c = 3, x = 1, img = ee.Image(0), s = 'z';
return_ = [1, 2].map(function (v) { return v / 2; /* half */ });
var url = 'http://example.com/a//b'; // trailing note

var n = ee.Number(4) // comment between
  .sqrt();
Map.addLayer(img, {min: 0, max: 1 /* vis */}, 'NDVI // name');
// standalone comment 61
var n = ee.Number(4) // comment between
  .sqrt();
var q = a / b / c; // divisions, not regexes
// standalone comment 92

print(typeof /x/.source); // regex after keyword
