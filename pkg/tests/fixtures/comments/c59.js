var a = 1, b = 2, c = 3, x = 1, img = ee.Image(0), s = 'z';
Map.addLayer(img, {min: 0, max: 1 /* vis */}, 'NDVI // name');
var t = `line // kept ${ee.Number(1).add(2) /* inner */} /* kept */`;

var re = /\/\*.*?\*\//g; // regex with comment delimiters
var d = x++ / 2; /* after postfix */
// standalone comment 24
var url = 'http://example.com/a//b'; // trailing note
var q = a / b / c; // divisions, not regexes

var re = /\/\*.*?\*\//g; // regex with comment delimiters
var n = ee.Number(4) // comment between
  .sqrt();
var img = ee.Image('X')  /* block */ .select(['B4']) // after chain
